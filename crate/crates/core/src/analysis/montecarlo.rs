//! Seeded Monte Carlo batches of protocol runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{Decoder, WeightConvention};
use crate::noise::EffectiveRates;
use crate::protocol::run_protocol;
use crate::topology::{build_network, build_torus_block, dual_sector, CodeLattice, Sector};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Lattice a batch runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    Torus {
        distance: usize,
    },
    Network {
        alice_bob_distance: usize,
        margin: usize,
    },
}

impl Geometry {
    pub fn lattice(&self) -> Result<Box<dyn CodeLattice + Send + Sync>> {
        Ok(match *self {
            Geometry::Torus { distance } => Box::new(build_torus_block(distance)?),
            Geometry::Network {
                alice_bob_distance,
                margin,
            } => Box::new(build_network(alice_bob_distance, margin)?),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Geometry::Torus { .. } => "torus",
            Geometry::Network { .. } => "network",
        }
    }

    /// Torus distance, or the Alice-Bob distance of a network.
    pub fn size(&self) -> usize {
        match *self {
            Geometry::Torus { distance } => distance,
            Geometry::Network {
                alice_bob_distance, ..
            } => alice_bob_distance,
        }
    }

    pub fn margin(&self) -> Option<usize> {
        match *self {
            Geometry::Torus { .. } => None,
            Geometry::Network { margin, .. } => Some(margin),
        }
    }
}

/// Everything needed to reproduce a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub geometry: Geometry,
    pub rates: EffectiveRates,
    pub n_rounds: usize,
    pub seed: u64,
    #[serde(default)]
    pub convention: WeightConvention,
}

impl TrialConfig {
    pub fn torus(distance: usize, rates: EffectiveRates, n_rounds: usize, seed: u64) -> Self {
        Self {
            geometry: Geometry::Torus { distance },
            rates,
            n_rounds,
            seed,
            convention: WeightConvention::Likelihood,
        }
    }
}

/// Failure counts of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub config: TrialConfig,
    pub n_trials: u64,
    /// Indexed by [`Sector::index`].
    pub failures: [u64; 2],
    /// Trials where either sector failed.
    pub any_failures: u64,
}

impl TrialBatch {
    pub fn rate(&self, sector: Sector) -> f64 {
        self.failures[sector.index()] as f64 / self.n_trials as f64
    }

    pub fn interval(&self, sector: Sector) -> (f64, f64) {
        wilson_interval(self.failures[sector.index()], self.n_trials, Z95)
    }

    /// Both sectors counted as separate samples.
    pub fn pooled(&self) -> (u64, u64) {
        (self.failures[0] + self.failures[1], 2 * self.n_trials)
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Random stream of trial `index`: the seed keys the generator and the
/// trial index selects the stream, so nearby seeds never share trials.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `n_trials` independent protocol runs and decodes both sectors.
///
/// A sector fails when its first witness is flipped. The network has a
/// single witness per sector; the torus block carries two logical qubits
/// per sector and only the first is followed.
///
/// Trial `i` draws from [`trial_rng`]`(seed, i)`, so the counts do not
/// depend on how the work is split across threads.
pub fn estimate_logical_error_rate(config: &TrialConfig, n_trials: u64) -> Result<TrialBatch> {
    if n_trials == 0 {
        return Err(Error::out_of_range("n_trials", 0.0, "[1, inf)"));
    }
    if config.n_rounds == 0 {
        return Err(Error::InvalidDimensions("n_rounds must be >= 1".into()));
    }
    let lattice = config.geometry.lattice()?;
    let decoders = dual_sector(lattice.as_ref()).map(|layout| {
        Decoder::with_convention(layout, &config.rates, config.n_rounds, config.convention)
    });
    let counts = (0..n_trials)
        .into_par_iter()
        .map(|i| -> Result<[u64; 3]> {
            let mut rng = trial_rng(config.seed, i);
            let run = run_protocol(lattice.as_ref(), &config.rates, config.n_rounds, &mut rng)?;
            let events = run.events();
            let mut fail = [0u64; 3];
            for s in 0..2 {
                let decoded = decoders[s].decode(&events[s])?;
                if decoders[s].residual_mask(&decoded, &run.errors[s]) & 1 != 0 {
                    fail[s] = 1;
                    fail[2] = 1;
                }
            }
            Ok(fail)
        })
        .try_reduce(
            || [0; 3],
            |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2]]),
        )?;
    Ok(TrialBatch {
        config: *config,
        n_trials,
        failures: [counts[0], counts[1]],
        any_failures: counts[2],
    })
}

/// Runs `f` on a dedicated pool of `workers` threads (0 picks the default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
