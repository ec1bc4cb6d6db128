//! Physical noise parameters, the phenomenological rates they induce, and
//! the per-round error sampler.

mod faults;

pub use faults::{enumerate_fault_classes, FaultClass, FaultReport, GadgetKind, GadgetResidual};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::topology::SectorLayout;
use crate::{Error, Result};

/// Physical error parameters of the network.
///
/// `q` is the Werner parameter of each neighbouring Bell pair, `p` the
/// depolarizing rate of every local operation and `p_m` the memory
/// depolarizing rate per entanglement-generation window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhysicalNoise {
    pub q: f64,
    pub p: f64,
    pub p_m: f64,
}

impl PhysicalNoise {
    pub fn new(q: f64, p: f64, p_m: f64) -> Result<Self> {
        check_unit("q", q)?;
        check_unit("p", p)?;
        check_unit("p_m", p_m)?;
        Ok(Self { q, p, p_m })
    }

    /// `1 - F` of a single Werner pair.
    pub fn channel_error_rate(&self) -> f64 {
        0.75 * self.q
    }
}

/// Phenomenological error probabilities per round and sector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EffectiveRates {
    /// Stabilizer outcome flip probability.
    pub eps_s: f64,
    /// Data qubit error probability.
    pub eps_e: f64,
    /// Probability of each correlated pair.
    pub eps_c: f64,
}

impl EffectiveRates {
    pub fn new(eps_s: f64, eps_e: f64, eps_c: f64) -> Result<Self> {
        check_unit("eps_S", eps_s)?;
        check_unit("eps_E", eps_e)?;
        check_unit("eps_C", eps_c)?;
        if 2.0 * eps_c > eps_s.min(eps_e) + 1e-15 {
            return Err(Error::out_of_range(
                "eps_C",
                eps_c,
                "[0, min(eps_S, eps_E) / 2]",
            ));
        }
        Ok(Self {
            eps_s,
            eps_e,
            eps_c,
        })
    }

    /// Rates at fixed `eps_S / eps_E` ratio with no correlations.
    pub fn from_ratio(eps_e: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::out_of_range("ratio", ratio, "(0, inf)"));
        }
        Self::new((eps_e * ratio).min(1.0), eps_e, 0.0)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.eps_s == 0.0 && self.eps_e == 0.0 && self.eps_c == 0.0
    }

    fn independent_meas(&self) -> f64 {
        (self.eps_s - 2.0 * self.eps_c).max(0.0)
    }

    fn independent_data(&self) -> f64 {
        (self.eps_e - 2.0 * self.eps_c).max(0.0)
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::out_of_range(name, value, "[0, 1]"))
    }
}

/// Rates with noiseless local operations: `eps_S = 2q`, `eps_E = q`.
pub fn channel_only_rates(q: f64) -> Result<EffectiveRates> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::out_of_range("q", q, "[0, 0.5]"));
    }
    EffectiveRates::new(2.0 * q, q, 0.0)
}

/// First-order rates including operation and memory noise.
pub fn full_rates(noise: PhysicalNoise) -> Result<EffectiveRates> {
    let PhysicalNoise { q, p, p_m } = PhysicalNoise::new(noise.q, noise.p, noise.p_m)?;
    let eps_s = 2.0 * q + 124.0 * p / 15.0;
    let eps_e = q + 76.0 * p / 15.0 + 2.0 * p_m / 3.0;
    let eps_c = 8.0 * p / 15.0;
    EffectiveRates::new(eps_s, eps_e, eps_c)
}

/// Error bits of one round in one sector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundErrors {
    pub data: Vec<bool>,
    pub meas: Vec<bool>,
}

impl RoundErrors {
    pub fn empty(num_qubits: usize, num_stabilizers: usize) -> Self {
        Self {
            data: vec![false; num_qubits],
            meas: vec![false; num_stabilizers],
        }
    }
}

/// Draws one round of independent and correlated errors for a sector.
pub fn sample_round_errors<R: Rng + ?Sized>(
    rates: &EffectiveRates,
    layout: &SectorLayout,
    rng: &mut R,
) -> RoundErrors {
    let mut out = RoundErrors::empty(layout.num_qubits(), layout.num_stabilizers());
    sample_into(rates, layout, rng, &mut out);
    out
}

fn sample_into<R: Rng + ?Sized>(
    rates: &EffectiveRates,
    layout: &SectorLayout,
    rng: &mut R,
    out: &mut RoundErrors,
) {
    let p_meas = rates.independent_meas();
    let p_data = rates.independent_data();
    for bit in out.meas.iter_mut() {
        *bit = p_meas > 0.0 && rng.random::<f64>() < p_meas;
    }
    for bit in out.data.iter_mut() {
        *bit = p_data > 0.0 && rng.random::<f64>() < p_data;
    }
    if rates.eps_c > 0.0 {
        for (s, &[right, down]) in layout.correlated.iter().enumerate() {
            if rng.random::<f64>() < rates.eps_c {
                out.meas[s] ^= true;
                if let Some(r) = right {
                    out.data[r] ^= true;
                }
            }
            if rng.random::<f64>() < rates.eps_c {
                out.meas[s] ^= true;
                if let Some(d) = down {
                    out.data[d] ^= true;
                }
            }
            if rng.random::<f64>() < rates.eps_c {
                if let Some(r) = right {
                    out.data[r] ^= true;
                }
                if let Some(d) = down {
                    out.data[d] ^= true;
                }
            }
        }
    }
}

/// Ground-truth errors of one sector over a whole run.
///
/// `data[t]` are the errors that occur just before measurement round `t`;
/// layer `n_rounds` holds the errors after the last round, before the final
/// single-qubit readout. `meas[t]` flips the outcomes of round `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorHistory {
    pub data: Vec<Vec<bool>>,
    pub meas: Vec<Vec<bool>>,
}

impl ErrorHistory {
    pub fn empty(layout: &SectorLayout, n_rounds: usize) -> Self {
        Self {
            data: vec![vec![false; layout.num_qubits()]; n_rounds + 1],
            meas: vec![vec![false; layout.num_stabilizers()]; n_rounds],
        }
    }

    pub fn n_rounds(&self) -> usize {
        self.meas.len()
    }

    /// Samples `n_rounds` noisy rounds plus the post-final data layer.
    pub fn sample<R: Rng + ?Sized>(
        rates: &EffectiveRates,
        layout: &SectorLayout,
        n_rounds: usize,
        rng: &mut R,
    ) -> Self {
        let mut history = Self::empty(layout, n_rounds);
        let mut round = RoundErrors::empty(layout.num_qubits(), layout.num_stabilizers());
        for t in 0..=n_rounds {
            sample_into(rates, layout, rng, &mut round);
            history.data[t].copy_from_slice(&round.data);
            if t < n_rounds {
                history.meas[t].copy_from_slice(&round.meas);
            }
        }
        history
    }

    pub fn is_clean(&self) -> bool {
        self.data
            .iter()
            .chain(&self.meas)
            .all(|l| l.iter().all(|&b| !b))
    }
}
