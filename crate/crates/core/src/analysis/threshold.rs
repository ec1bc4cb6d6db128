//! Threshold location, the threshold line and its operational fixed point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::montecarlo::{estimate_logical_error_rate, wilson_interval, TrialConfig, Z95};
use crate::decoder::WeightConvention;
use crate::noise::{full_rates, EffectiveRates, PhysicalNoise};
use crate::{Error, Result};

/// One `(d, eps_E)` point of a threshold sweep. Counts pool both sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub distance: usize,
    pub eps_e: f64,
    pub samples: u64,
    pub failures: u64,
}

impl SweepPoint {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.samples as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.failures, self.samples, Z95)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub sizes: Vec<usize>,
    pub trials_per_point: u64,
    /// Fixed `eps_E` grid; when empty a coarse scan picks one.
    pub grid: Vec<f64>,
    pub seed: u64,
    pub bootstrap: usize,
    pub convention: WeightConvention,
}

impl ThresholdOptions {
    pub fn new(sizes: Vec<usize>, trials_per_point: u64, seed: u64) -> Self {
        Self {
            sizes,
            trials_per_point,
            grid: Vec::new(),
            seed,
            bootstrap: 200,
            convention: WeightConvention::Likelihood,
        }
    }
}

/// Crossing estimate at one `eps_S / eps_E` ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub ratio: f64,
    pub eps_t: f64,
    pub uncertainty: f64,
    /// Crossing of each successive pair of sizes.
    pub crossings: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

const COARSE_GRID: [f64; 7] = [0.008, 0.012, 0.017, 0.023, 0.03, 0.04, 0.055];
const FINE_POINTS: usize = 5;
const FINE_SPAN: f64 = 0.2;

/// Locates the threshold at fixed `ratio = eps_S / eps_E` on torus blocks
/// with `N = d` rounds.
///
/// Each size's failure curve is fitted with a quadratic in log-odds and the
/// crossings of successive sizes are averaged. The uncertainty is the spread
/// of that average under binomial resampling of every point.
pub fn estimate_threshold(ratio: f64, opts: &ThresholdOptions) -> Result<ThresholdEstimate> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::out_of_range("ratio", ratio, "(0, inf)"));
    }
    if opts.sizes.len() < 2 {
        return Err(Error::InvalidDimensions(
            "threshold estimation needs at least two sizes".into(),
        ));
    }
    let mut sizes = opts.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let grid = if opts.grid.is_empty() {
        let coarse_trials = (opts.trials_per_point / 10).max(500);
        let coarse: Vec<f64> = COARSE_GRID
            .iter()
            .copied()
            .filter(|&e| e * ratio < 0.5)
            .collect();
        let points = sweep(ratio, &sizes, &coarse, coarse_trials, opts, 1)?;
        let centre = coarse_crossing(&sizes, &coarse, &points)?;
        (0..FINE_POINTS)
            .map(|i| {
                let t = i as f64 / (FINE_POINTS - 1) as f64;
                centre * (1.0 - FINE_SPAN + 2.0 * FINE_SPAN * t)
            })
            .collect()
    } else {
        let mut g = opts.grid.clone();
        g.sort_by(f64::total_cmp);
        g
    };
    if grid.len() < 3 {
        return Err(Error::InvalidDimensions(
            "threshold grid needs at least three points".into(),
        ));
    }
    let points = sweep(ratio, &sizes, &grid, opts.trials_per_point, opts, 0)?;
    let crossings = crossings_of(&sizes, &grid, &points)?;
    let eps_t = mean(&crossings);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xb007_57a9);
    let mut boot = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let resampled: Vec<SweepPoint> = points
            .iter()
            .map(|p| {
                let b = Binomial::new(p.samples, p.rate()).expect("rate is a probability");
                SweepPoint {
                    failures: b.sample(&mut rng),
                    ..*p
                }
            })
            .collect();
        if let Ok(c) = crossings_of(&sizes, &grid, &resampled) {
            boot.push(mean(&c));
        }
    }
    let uncertainty = if boot.len() >= 2 {
        std_dev(&boot)
    } else {
        f64::NAN
    };
    Ok(ThresholdEstimate {
        ratio,
        eps_t,
        uncertainty,
        crossings,
        points,
    })
}

fn sweep(
    ratio: f64,
    sizes: &[usize],
    grid: &[f64],
    trials: u64,
    opts: &ThresholdOptions,
    stage: u64,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(sizes.len() * grid.len());
    for (si, &d) in sizes.iter().enumerate() {
        for (gi, &eps_e) in grid.iter().enumerate() {
            let rates = EffectiveRates::from_ratio(eps_e, ratio)?;
            let mut cfg = TrialConfig::torus(d, rates, d, point_seed(opts.seed, stage, si, gi));
            cfg.convention = opts.convention;
            let batch = estimate_logical_error_rate(&cfg, trials)?;
            let (failures, samples) = batch.pooled();
            out.push(SweepPoint {
                distance: d,
                eps_e,
                samples,
                failures,
            });
        }
    }
    Ok(out)
}

/// Seed base of one sweep point.
pub fn point_seed(seed: u64, stage: u64, size_index: usize, grid_index: usize) -> u64 {
    let mut x = seed
        ^ stage.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ ((size_index as u64) << 40)
        ^ ((grid_index as u64) << 20);
    // splitmix64 finaliser
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn curve<'a>(points: &'a [SweepPoint], d: usize) -> Vec<&'a SweepPoint> {
    points.iter().filter(|p| p.distance == d).collect()
}

/// Rough crossing from piecewise-linear rate curves of the smallest and
/// largest sizes.
fn coarse_crossing(sizes: &[usize], grid: &[f64], points: &[SweepPoint]) -> Result<f64> {
    let small = curve(points, sizes[0]);
    let large = curve(points, *sizes.last().unwrap());
    let diff: Vec<f64> = small
        .iter()
        .zip(&large)
        .map(|(a, b)| a.rate() - b.rate())
        .collect();
    for i in 1..diff.len() {
        if diff[i - 1] > 0.0 && diff[i] <= 0.0 {
            let t = diff[i - 1] / (diff[i - 1] - diff[i]);
            return Ok(grid[i - 1] + t * (grid[i] - grid[i - 1]));
        }
    }
    Err(Error::NoCrossing {
        lo: grid[0],
        hi: grid[grid.len() - 1],
    })
}

fn crossings_of(sizes: &[usize], grid: &[f64], points: &[SweepPoint]) -> Result<Vec<f64>> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let fits: Vec<[f64; 3]> = sizes
        .iter()
        .map(|&d| fit_log_odds(&curve(points, d), lo, hi))
        .collect::<Result<_>>()?;
    fits.windows(2)
        .map(|w| crossing(&w[0], &w[1], lo, hi).ok_or(Error::NoCrossing { lo, hi }))
        .collect()
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Weighted quadratic fit of log-odds against `eps_E` rescaled to [-1, 1].
fn fit_log_odds(curve: &[&SweepPoint], lo: f64, hi: f64) -> Result<[f64; 3]> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for p in curve {
        let n = p.samples as f64;
        // continuity correction keeps empty or saturated points finite
        let r = (p.failures as f64 + 0.5) / (n + 1.0);
        let y = logit(r);
        let w = n * r * (1.0 - r);
        let x = scale(p.eps_e, lo, hi);
        let row = [1.0, x, x * x];
        for i in 0..3 {
            atb[i] += w * row[i] * y;
            for j in 0..3 {
                ata[i][j] += w * row[i] * row[j];
            }
        }
    }
    solve3(ata, atb).ok_or_else(|| Error::DegenerateFit("singular log-odds fit".into()))
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    2.0 * (x - lo) / (hi - lo) - 1.0
}

fn eval(c: &[f64; 3], x: f64) -> f64 {
    c[0] + x * (c[1] + x * c[2])
}

/// First point in `[lo, hi]` where `small - large` turns non-positive.
fn crossing(small: &[f64; 3], large: &[f64; 3], lo: f64, hi: f64) -> Option<f64> {
    let f = |x: f64| eval(small, x) - eval(large, x);
    const STEPS: usize = 400;
    let mut a = -1.0;
    let mut fa = f(a);
    for i in 1..=STEPS {
        let b = -1.0 + 2.0 * i as f64 / STEPS as f64;
        let fb = f(b);
        if fa > 0.0 && fb <= 0.0 {
            let (mut l, mut r) = (a, b);
            for _ in 0..100 {
                let m = 0.5 * (l + r);
                if f(m) > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            let x = 0.5 * (l + r);
            return Some(lo + (x + 1.0) * (hi - lo) / 2.0);
        }
        a = b;
        fa = fb;
    }
    None
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// A measured threshold at one ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub ratio: f64,
    pub eps_t: f64,
    pub uncertainty: f64,
}

impl From<&ThresholdEstimate> for ThresholdPoint {
    fn from(e: &ThresholdEstimate) -> Self {
        Self {
            ratio: e.ratio,
            eps_t: e.eps_t,
            uncertainty: e.uncertainty,
        }
    }
}

/// `eps_t = eps0 - k log2(eps_S / eps_E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdLine {
    pub eps0: f64,
    pub k: f64,
}

impl ThresholdLine {
    /// The published fit.
    pub const REFERENCE: ThresholdLine = ThresholdLine {
        eps0: 0.0294,
        k: 0.0072,
    };

    pub fn at(&self, ratio: f64) -> f64 {
        self.eps0 - self.k * ratio.log2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub eps0: f64,
    pub k: f64,
    /// Standard errors; absent with only two points.
    pub eps0_err: Option<f64>,
    pub k_err: Option<f64>,
    pub residuals: Vec<f64>,
    pub points: Vec<ThresholdPoint>,
}

impl ThresholdFit {
    pub fn line(&self) -> ThresholdLine {
        ThresholdLine {
            eps0: self.eps0,
            k: self.k,
        }
    }

    /// Whether the threshold falls with the ratio.
    pub fn is_decreasing(&self) -> bool {
        self.k > 0.0
    }
}

/// Least-squares line of `eps_t` against `log2(ratio)`.
pub fn fit_threshold_line(points: &[ThresholdPoint]) -> Result<ThresholdFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if points.iter().any(|p| !(p.ratio > 0.0)) {
        return Err(Error::DegenerateFit("ratios must be positive".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.ratio.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.eps_t).collect();
    let mx = mean(&xs);
    let my = mean(&ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return Err(Error::DegenerateFit("all ratios are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let eps0 = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (eps0 + slope * x))
        .collect();
    let (eps0_err, k_err) = if points.len() > 2 {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0);
        (
            Some((s2 * (1.0 / n + mx * mx / sxx)).sqrt()),
            Some((s2 / sxx).sqrt()),
        )
    } else {
        (None, None)
    };
    Ok(ThresholdFit {
        eps0,
        k: -slope,
        eps0_err,
        k_err,
        residuals,
        points: points.to_vec(),
    })
}

/// Largest channel parameter `q` whose full rates still sit below the
/// reference threshold line.
pub fn operational_threshold(p: f64, p_m: f64) -> Result<f64> {
    operational_threshold_with(ThresholdLine::REFERENCE, p, p_m)
}

/// Solves `eps_E(q) = eps0 - k log2(eps_S(q) / eps_E(q))` by bisection,
/// ignoring correlated errors.
pub fn operational_threshold_with(line: ThresholdLine, p: f64, p_m: f64) -> Result<f64> {
    PhysicalNoise::new(0.0, p, p_m)?;
    let gap = |q: f64| -> Result<f64> {
        let r = full_rates(PhysicalNoise::new(q, p, p_m)?)?;
        Ok(r.eps_e - line.at(r.eps_s / r.eps_e))
    };
    // q = 0 with p = p_m = 0 leaves the ratio undefined; its limit is 2
    let mut lo = 1e-15;
    let hi_rates = 0.5f64
        .min((1.0 - 124.0 * p / 15.0) / 2.0)
        .min(1.0 - 76.0 * p / 15.0 - 2.0 * p_m / 3.0);
    if hi_rates <= lo || gap(lo).map_or(true, |g| g >= 0.0) {
        return Err(Error::NoSolution(format!(
            "operation noise p = {p}, p_m = {p_m} alone exceeds the threshold"
        )));
    }
    let mut hi = hi_rates;
    if gap(hi)? <= 0.0 {
        return Err(Error::NoSolution("threshold line never crossed".into()));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fitted `rate ~ A exp(-kappa N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kappa: f64,
    pub amplitude: f64,
}

/// Poisson maximum-likelihood fit of `failures ~ trials * A exp(-kappa N)`
/// over `(N, trials, failures)` points. Zero counts are used as they are.
/// Returns an infinite `kappa` when every failure sits at the smallest `N`.
pub fn fit_exponential_decay(points: &[(usize, u64, u64)]) -> Result<DecayFit> {
    let total: u64 = points.iter().map(|p| p.2).sum();
    if total == 0 {
        return Err(Error::DegenerateFit("no failures observed".into()));
    }
    let ns: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let (n_min, n_max) = ns
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if n_min == n_max {
        return Err(Error::DegenerateFit("all round counts are equal".into()));
    }
    let k = total as f64;
    let count_mean = points
        .iter()
        .zip(&ns)
        .map(|(p, n)| p.2 as f64 * n)
        .sum::<f64>()
        / k;
    // exposure-weighted mean of N falls monotonically in kappa
    let exposure_mean = |kappa: f64| {
        let w: Vec<f64> = points
            .iter()
            .zip(&ns)
            .map(|(p, n)| p.1 as f64 * (-kappa * (n - n_min)).exp())
            .collect();
        w.iter().zip(&ns).map(|(w, n)| w * n).sum::<f64>() / w.iter().sum::<f64>()
    };
    let amplitude = |kappa: f64| {
        let e: f64 = points
            .iter()
            .zip(&ns)
            .map(|(p, n)| p.1 as f64 * (-kappa * n).exp())
            .sum();
        k / e
    };
    if count_mean <= n_min {
        return Ok(DecayFit {
            kappa: f64::INFINITY,
            amplitude: f64::NAN,
        });
    }
    let (mut lo, mut hi) = (-50.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if exposure_mean(mid) > count_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    Ok(DecayFit {
        kappa,
        amplitude: amplitude(kappa),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact_points(line: ThresholdLine, ratios: &[f64]) -> Vec<ThresholdPoint> {
        ratios
            .iter()
            .map(|&ratio| ThresholdPoint {
                ratio,
                eps_t: line.at(ratio),
                uncertainty: 0.0,
            })
            .collect()
    }

    #[test]
    fn line_fit_recovers_exact_parameters() {
        let pts = exact_points(ThresholdLine::REFERENCE, &[1.0, 1.5, 2.0, 2.5, 3.0]);
        let fit = fit_threshold_line(&pts).unwrap();
        assert!((fit.eps0 - 0.0294).abs() < 1e-15);
        assert!((fit.k - 0.0072).abs() < 1e-15);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-15));
        assert!(fit.k_err.unwrap() < 1e-12);
        assert!(fit.is_decreasing());
    }

    #[test]
    fn two_points_give_the_line_through_them() {
        let pts = [
            ThresholdPoint {
                ratio: 1.0,
                eps_t: 0.03,
                uncertainty: 0.0,
            },
            ThresholdPoint {
                ratio: 4.0,
                eps_t: 0.01,
                uncertainty: 0.0,
            },
        ];
        let fit = fit_threshold_line(&pts).unwrap();
        assert!((fit.eps0 - 0.03).abs() < 1e-15);
        assert!((fit.k - 0.01).abs() < 1e-15);
        assert_eq!(fit.k_err, None);
    }

    #[test]
    fn equal_ratios_are_degenerate() {
        let p = ThresholdPoint {
            ratio: 2.0,
            eps_t: 0.02,
            uncertainty: 0.0,
        };
        assert!(matches!(
            fit_threshold_line(&[p, p, p]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(fit_threshold_line(&[p]).is_err());
    }

    #[test]
    fn base_two_reproduces_the_ratio_two_threshold() {
        let line = ThresholdLine::REFERENCE;
        assert!((line.at(2.0) - 0.0222).abs() < 1e-12);
        // other bases miss the quoted 2.23 %
        assert!((line.eps0 - line.k * 2f64.ln() - 0.0223).abs() > 1.5e-3);
        assert!((line.eps0 - line.k * 2f64.log10() - 0.0223).abs() > 4e-3);
        assert!((line.at(3.0) - 0.0180).abs() < 1e-4);
    }

    /// Independent fixed-point solver: secant iteration on the same
    /// equation, written out by hand.
    fn secant(p: f64, p_m: f64) -> f64 {
        let g = |q: f64| {
            let s = 2.0 * q + 124.0 * p / 15.0;
            let e = q + 76.0 * p / 15.0 + 2.0 * p_m / 3.0;
            e - (0.0294 - 0.0072 * (s / e).log2())
        };
        let (mut a, mut b) = (0.01, 0.03);
        for _ in 0..100 {
            let (ga, gb) = (g(a), g(b));
            if gb == ga {
                break;
            }
            let c = b - gb * (b - a) / (gb - ga);
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn operational_threshold_without_operation_noise() {
        let q = operational_threshold(0.0, 0.0).unwrap();
        assert!((q - 0.0222).abs() < 1e-6, "{q}");
    }

    #[test]
    fn operational_threshold_with_operation_noise() {
        let q = operational_threshold(1e-3, 0.0).unwrap();
        assert!((q - secant(1e-3, 0.0)).abs() < 1e-6);
        assert!((0.0175..0.0177).contains(&q), "{q}");
        assert!((0.0124..0.0139).contains(&(0.75 * q)));
    }

    #[test]
    fn operational_threshold_rejects_hopeless_operations() {
        assert!(matches!(
            operational_threshold(0.01, 0.0),
            Err(Error::NoSolution(_))
        ));
        assert!(operational_threshold(2.0, 0.0).is_err());
    }

    #[test]
    fn memory_noise_lowers_threshold_mildly() {
        for i in 0..=10 {
            let p = i as f64 * 1e-4;
            let a = operational_threshold(p, 0.0).unwrap();
            let b = operational_threshold(p, 1e-2).unwrap();
            assert!(b < a);
            assert!(b > 0.65 * a);
            assert!((b - secant(p, 1e-2)).abs() < 1e-6);
        }
    }

    #[test]
    fn decay_fit_recovers_noiseless_exponential() {
        let pts: Vec<(usize, u64, u64)> = [5usize, 9, 13]
            .iter()
            .map(|&n| {
                (
                    n,
                    1_000_000_000,
                    (1e9 * 0.3 * (-0.8 * n as f64).exp()).round() as u64,
                )
            })
            .collect();
        let fit = fit_exponential_decay(&pts).unwrap();
        assert!((fit.kappa - 0.8).abs() < 1e-3, "{fit:?}");
        assert!((fit.amplitude - 0.3).abs() < 1e-3);
    }

    #[test]
    fn decay_fit_edge_cases() {
        assert!(fit_exponential_decay(&[(5, 10, 0), (9, 10, 0)]).is_err());
        let fit = fit_exponential_decay(&[(5, 100, 4), (9, 100, 0)]).unwrap();
        assert!(fit.kappa.is_infinite());
        // growth gives a negative rate
        let fit = fit_exponential_decay(&[(5, 100, 1), (9, 100, 10)]).unwrap();
        assert!(fit.kappa < 0.0);
    }

    #[test]
    fn log_odds_crossing_of_synthetic_curves() {
        // curves logit(p) = a_d + b_d (eps - 0.03) crossing at 0.03
        let grid = [0.024, 0.027, 0.03, 0.033, 0.036];
        let sizes = [5, 7, 9];
        let mut pts = Vec::new();
        for &d in &sizes {
            for &e in &grid {
                let y = -2.0 + (d as f64) * 20.0 * (e - 0.03);
                let p = 1.0 / (1.0 + (-y as f64).exp());
                let n = 1u64 << 40;
                pts.push(SweepPoint {
                    distance: d,
                    eps_e: e,
                    samples: n,
                    failures: (p * n as f64).round() as u64,
                });
            }
        }
        let c = crossings_of(&sizes, &grid, &pts).unwrap();
        for x in c {
            assert!((x - 0.03).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn parallel_curves_have_no_crossing() {
        let grid = [0.01, 0.02, 0.03];
        let pts: Vec<SweepPoint> = [3usize, 5]
            .iter()
            .flat_map(|&d| {
                grid.iter().map(move |&e| SweepPoint {
                    distance: d,
                    eps_e: e,
                    samples: 10_000,
                    failures: (e * 10_000.0 * d as f64) as u64,
                })
            })
            .collect();
        assert!(matches!(
            crossings_of(&[3, 5], &grid, &pts),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn small_sweep_brackets_the_threshold() {
        let mut opts = ThresholdOptions::new(vec![3, 5], 3000, 1);
        opts.grid = vec![0.015, 0.03, 0.045, 0.06];
        opts.bootstrap = 20;
        let est = estimate_threshold(1.0, &opts).unwrap();
        assert!((0.015..0.06).contains(&est.eps_t), "{est:?}");
        assert_eq!(est.points.len(), 8);
        assert!(est.uncertainty.is_finite());
        let mut single = opts.clone();
        single.sizes = vec![3];
        assert!(estimate_threshold(1.0, &single).is_err());
        assert!(estimate_threshold(0.0, &opts).is_err());
    }

    proptest! {
        #[test]
        fn line_fit_is_exact_on_any_line(
            eps0 in 0.01f64..0.05,
            k in -0.02f64..0.02,
            ratios in proptest::collection::btree_set(1u32..40, 2..7),
        ) {
            let line = ThresholdLine { eps0, k };
            let r: Vec<f64> = ratios.iter().map(|&x| x as f64 / 8.0).collect();
            let fit = fit_threshold_line(&exact_points(line, &r)).unwrap();
            prop_assert!((fit.eps0 - eps0).abs() < 1e-12);
            prop_assert!((fit.k - k).abs() < 1e-12);
        }

        #[test]
        fn operational_threshold_solves_the_fixed_point(p in 0.0f64..1.5e-3, pm in 0.0f64..0.01) {
            let q = operational_threshold(p, pm).unwrap();
            let r = full_rates(PhysicalNoise::new(q, p, pm).unwrap()).unwrap();
            prop_assert!((r.eps_e - ThresholdLine::REFERENCE.at(r.eps_s / r.eps_e)).abs() < 1e-7);
        }
    }
}
