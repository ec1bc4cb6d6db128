//! End-to-end acceptance run. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any fails.
//!
//! The threshold sweeps dominate: expect roughly an hour on a single core.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use qns_core::analysis::{
    entanglement_rate, estimate_logical_error_rate, estimate_threshold, final_state_noise,
    fit_exponential_decay, fit_threshold_line, operational_threshold, with_workers, write_rate_csv,
    RateRow, ThresholdEstimate, ThresholdOptions, ThresholdPoint, TrialConfig,
};
use qns_core::decoder::{brute_force_matching, mwpm, Decoder, MatchingGraph};
use qns_core::noise::{
    channel_only_rates, enumerate_fault_classes, full_rates, EffectiveRates, ErrorHistory,
    PhysicalNoise,
};
use qns_core::topology::{build_torus_block, dual_sector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [5, 7, 9];
const TRIALS_PER_POINT: u64 = 20_000;
const RATIOS: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];
const SEED: u64 = 20_240_917;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, ok: bool, detail: String, took: Duration) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {id:>2}. {name}: {detail} ({:.1}s)",
            took.as_secs_f64()
        );
        if !ok {
            self.failed += 1;
        }
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn threshold_at(ratio: f64) -> Result<ThresholdEstimate, String> {
    let opts = ThresholdOptions::new(SIZES.to_vec(), TRIALS_PER_POINT, SEED);
    estimate_threshold(ratio, &opts).map_err(|e| e.to_string())
}

fn describe(e: &ThresholdEstimate) -> String {
    let c: Vec<String> = e.crossings.iter().map(|c| format!("{c:.5}")).collect();
    format!(
        "eps_t = {:.5} +- {:.5} (crossings {})",
        e.eps_t,
        e.uncertainty,
        c.join(", ")
    )
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };

    // 4. operational threshold
    let t = Instant::now();
    match operational_threshold(1e-3, 0.0) {
        Ok(q) => {
            let ok = (0.0165..=0.0185).contains(&q) && (0.0124..=0.0139).contains(&(0.75 * q));
            report.check(
                4,
                "operational threshold at p = 1e-3",
                ok,
                format!(
                    "q* = {q:.5}, 3q*/4 = {:.5} (Monte Carlo with correlations quoted at 0.0169)",
                    0.75 * q
                ),
                t.elapsed(),
            );
        }
        Err(e) => report.check(
            4,
            "operational threshold at p = 1e-3",
            false,
            e.to_string(),
            t.elapsed(),
        ),
    }

    // 5. memory robustness
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..=20 {
        let p = i as f64 * 5e-5;
        match (
            operational_threshold(p, 0.0),
            operational_threshold(p, 1e-2),
        ) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a),
            _ => ok = false,
        }
    }
    report.check(
        5,
        "memory noise p_m = 1e-2 over p in [0, 1e-3]",
        ok && worst <= 0.35,
        format!("largest relative drop {:.1}%", 100.0 * worst),
        t.elapsed(),
    );

    // 6. fault enumeration
    let t = Instant::now();
    let fr = enumerate_fault_classes(PhysicalNoise::default());
    let r = |n, d| Ratio::new(n, d);
    let mut ok = true;
    for s in 0..2 {
        let es = fr.eps_s[s];
        ok &= es.q == r(2, 1) && es.p_m == r(0, 1);
        for sub in 0..2 {
            let ee = fr.eps_e[s][sub];
            ok &= ee.q == r(1, 1) && ee.p_m == r(2, 3);
        }
        ok &= fr.eps_c[s].q == r(0, 1) && fr.eps_c[s].p_m == r(0, 1);
    }
    let ops = (fr.eps_s[0].p, fr.eps_e[0][0].p, fr.eps_c[0].p);
    let matches_ops = ops == (r(124, 15), r(76, 15), r(8, 15));
    report.check(
        6,
        "fault enumeration coefficients",
        ok,
        format!(
            "q: (2, 1, 0), p_m: 2/3; p: ({}, {}, {}) vs (124/15, 76/15, 8/15) {}; {} residual classes",
            ops.0,
            ops.1,
            ops.2,
            if matches_ops { "equal" } else { "differ" },
            fr.classes.len()
        ),
        t.elapsed(),
    );
    for line in fr.table().lines() {
        println!("       {line}");
    }

    // 7. exact matching
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = 2 * rng.random_range(1..=5);
        let boundary = rng.random_bool(0.3);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.7) {
                    edges.push((u, v, rng.random::<f64>()));
                }
            }
            if boundary {
                edges.push((u, n, rng.random::<f64>()));
            }
        }
        let g = MatchingGraph {
            num_nodes: n,
            boundary,
            edges,
        };
        match (mwpm(&g), brute_force_matching(&g)) {
            (Ok(a), Ok(b)) if (a.weight - b.weight).abs() <= 1e-9 => {}
            (Err(_), Err(_)) => {}
            _ => mismatches += 1,
        }
    }
    report.check(
        7,
        "blossom vs brute force on 100 random graphs",
        mismatches == 0,
        format!("{mismatches} discrepancies"),
        t.elapsed(),
    );

    // 8. single faults on the torus
    let t = Instant::now();
    let rates = EffectiveRates::from_ratio(0.02, 1.0).unwrap();
    let mut faults = 0;
    let mut failures = 0;
    for d in [3, 5] {
        for layout in dual_sector(&build_torus_block(d).unwrap()) {
            let dec = Decoder::new(layout.clone(), &rates, d);
            let empty = ErrorHistory::empty(&layout, d);
            let mut inject = |e: ErrorHistory| {
                faults += 1;
                if dec.decode_errors(&e).unwrap().is_failure() {
                    failures += 1;
                }
            };
            for layer in 0..=d {
                for q in 0..layout.num_qubits() {
                    let mut e = empty.clone();
                    e.data[layer][q] = true;
                    inject(e);
                }
            }
            for round in 0..d {
                for s in 0..layout.num_stabilizers() {
                    let mut e = empty.clone();
                    e.meas[round][s] = true;
                    inject(e);
                }
            }
        }
    }
    report.check(
        8,
        "single-fault sweep, d = 3 and 5 torus, N = d",
        failures == 0,
        format!("{failures} logical failures over {faults} faults"),
        t.elapsed(),
    );

    // 10. closed-form identities
    let t = Instant::now();
    let mut ok = true;
    for i in 0..=50 {
        let q = i as f64 * 0.01;
        ok &= full_rates(PhysicalNoise::new(q, 0.0, 0.0).unwrap()).unwrap()
            == channel_only_rates(q).unwrap();
    }
    for (q, p, pm) in [(0.01, 0.0, 0.0), (0.0, 1e-3, 0.0), (0.02, 5e-4, 0.01)] {
        let f = final_state_noise(PhysicalNoise::new(q, p, pm).unwrap()).unwrap();
        ok &= within(
            f.fidelity + f.eps_x + f.eps_y + f.eps_z,
            1.0,
            2.0 * f64::EPSILON,
        );
    }
    let link = entanglement_rate(10.0, 0.2, 0.2e-3 / 6.0, 0.2e-3, 25).unwrap();
    ok &= link.attempts == 6 && within(link.success_prob, 0.99747, 5e-6);
    ok &= within(link.ebits_per_s, 200.0, 1e-9);
    report.check(
        10,
        "closed-form identities",
        ok,
        format!(
            "success probability {:.5}, {:.1} ebits/s",
            link.success_prob, link.ebits_per_s
        ),
        t.elapsed(),
    );

    // 11. determinism across worker counts
    let t = Instant::now();
    let cfg = TrialConfig::torus(5, EffectiveRates::from_ratio(0.025, 1.5).unwrap(), 5, SEED);
    let csv = |workers: usize| -> Vec<u8> {
        let batch = with_workers(workers, || estimate_logical_error_rate(&cfg, 4000))
            .unwrap()
            .unwrap();
        let mut out = Vec::new();
        write_rate_csv(&mut out, &RateRow::from_batch(&batch)).unwrap();
        out
    };
    let outs = [csv(1), csv(4), csv(8)];
    report.check(
        11,
        "byte-identical CSV with 1, 4 and 8 workers",
        outs[0] == outs[1] && outs[0] == outs[2],
        format!("{} bytes", outs[0].len()),
        t.elapsed(),
    );

    // 1-3. thresholds
    let mut estimates: Vec<Option<ThresholdEstimate>> = Vec::new();
    let mut times = Vec::new();
    for &ratio in &RATIOS {
        let t = Instant::now();
        match threshold_at(ratio) {
            Ok(e) => {
                println!("       ratio {ratio}: {}", describe(&e));
                estimates.push(Some(e));
            }
            Err(e) => {
                println!("       ratio {ratio}: {e}");
                estimates.push(None);
            }
        }
        times.push(t.elapsed());
    }
    let elapsed = |i: usize| times[i];
    match &estimates[0] {
        Some(e) => report.check(
            1,
            "threshold at eps_S/eps_E = 1",
            within(e.eps_t, 0.0294, 0.003),
            describe(e),
            elapsed(0),
        ),
        None => report.check(
            1,
            "threshold at eps_S/eps_E = 1",
            false,
            "no crossing".into(),
            elapsed(0),
        ),
    }
    match &estimates[2] {
        Some(e) => report.check(
            2,
            "threshold at eps_S/eps_E = 2",
            within(e.eps_t, 0.0223, 0.0025) && within(0.75 * e.eps_t, 0.0167, 0.002),
            format!("{}, channel error rate {:.5}", describe(e), 0.75 * e.eps_t),
            elapsed(2),
        ),
        None => report.check(
            2,
            "threshold at eps_S/eps_E = 2",
            false,
            "no crossing".into(),
            elapsed(2),
        ),
    }
    let points: Vec<ThresholdPoint> = estimates
        .iter()
        .flatten()
        .map(ThresholdPoint::from)
        .collect();
    let total: Duration = times.iter().sum();
    match fit_threshold_line(&points) {
        Ok(fit) if points.len() == RATIOS.len() => report.check(
            3,
            "threshold line over five ratios",
            (0.026..=0.033).contains(&fit.eps0) && (0.005..=0.010).contains(&fit.k),
            format!(
                "eps0 = {:.5} +- {:.5}, k = {:.5} +- {:.5}",
                fit.eps0,
                fit.eps0_err.unwrap_or(f64::NAN),
                fit.k,
                fit.k_err.unwrap_or(f64::NAN)
            ),
            total,
        ),
        Ok(_) => report.check(
            3,
            "threshold line over five ratios",
            false,
            "missing ratios".into(),
            total,
        ),
        Err(e) => report.check(
            3,
            "threshold line over five ratios",
            false,
            e.to_string(),
            total,
        ),
    }

    // 9. sub-threshold decay
    let t = Instant::now();
    let eps_t = estimates[0].as_ref().map_or(0.0294, |e| e.eps_t);
    let eps_e = eps_t / 3.0;
    let rates = EffectiveRates::from_ratio(eps_e, 1.0).unwrap();
    let mut pts = Vec::new();
    for (n, trials) in [(5usize, 20_000u64), (9, 100_000), (13, 20_000)] {
        let cfg = TrialConfig::torus(n, rates, n, SEED ^ n as u64);
        let b = estimate_logical_error_rate(&cfg, trials).unwrap();
        let (k, samples) = b.pooled();
        println!("       N = d = {n}: {k} failures in {samples} sector samples");
        pts.push((n, samples, k));
    }
    match fit_exponential_decay(&pts) {
        Ok(fit) => report.check(
            9,
            "decay at eps_E = eps_t / 3 over N in {5, 9, 13}",
            fit.kappa > 0.5,
            format!("eps_E = {eps_e:.5}, kappa = {:.3}", fit.kappa),
            t.elapsed(),
        ),
        Err(e) => report.check(
            9,
            "decay at eps_E = eps_t / 3",
            false,
            e.to_string(),
            t.elapsed(),
        ),
    }

    if report.failed == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
