//! Closed-form models of the final Bell pair and of the protocol's rate.

use serde::{Deserialize, Serialize};

use crate::noise::PhysicalNoise;
use crate::{Error, Result};

/// Pauli decomposition of the noise on the final Alice-Bob pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub eps_x: f64,
    pub eps_y: f64,
    pub eps_z: f64,
}

/// First-order final-state noise, taking the last round to be an X-type
/// stabilizer measurement.
pub fn final_state_noise(noise: PhysicalNoise) -> Result<FidelityReport> {
    let PhysicalNoise { q, p, p_m } = PhysicalNoise::new(noise.q, noise.p, noise.p_m)?;
    let eps_x = q / 2.0 + 2.0 * p_m / 3.0 + 44.0 * p / 15.0;
    let eps_y = 4.0 * p / 15.0;
    let eps_z = 4.0 * p / 3.0;
    let fidelity = 1.0 - eps_x - eps_y - eps_z;
    if fidelity < 0.0 || eps_x > 1.0 {
        return Err(Error::out_of_range("F", fidelity, "[0, 1]"));
    }
    Ok(FidelityReport {
        fidelity,
        eps_x,
        eps_y,
        eps_z,
    })
}

/// `L exp(-kappa N)`: probability that a long error chain survives `N`
/// rounds somewhere along `L` nodes.
pub fn long_chain_error(l: f64, n_rounds: f64, kappa: f64) -> Result<f64> {
    for (name, v) in [("L", l), ("N", n_rounds), ("kappa", kappa)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::out_of_range(name, v, "[0, inf)"));
        }
    }
    Ok(l * (-kappa * n_rounds).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Heralded success probability of one attempt.
    pub per_attempt: f64,
    pub attempts: u64,
    /// Probability that at least one attempt in the window succeeds.
    pub success_prob: f64,
    pub ebits_per_s: f64,
}

/// Neighbour link success within one window and the resulting ebit rate.
pub fn entanglement_rate(
    distance_km: f64,
    attenuation_db_per_km: f64,
    attempt_time_s: f64,
    window_s: f64,
    n_rounds: u64,
) -> Result<RateReport> {
    for (name, v) in [
        ("distance_km", distance_km),
        ("attenuation_db_per_km", attenuation_db_per_km),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::out_of_range(name, v, "[0, inf)"));
        }
    }
    for (name, v) in [("attempt_time_s", attempt_time_s), ("window_s", window_s)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::out_of_range(name, v, "(0, inf)"));
        }
    }
    if n_rounds == 0 {
        return Err(Error::out_of_range("n_rounds", 0.0, "[1, inf)"));
    }
    let per_attempt = 10f64.powf(-attenuation_db_per_km * distance_km / 10.0);
    // tolerate ratios like 0.2e-3 / (0.2e-3 / 6) landing just below 6
    let attempts = (window_s / attempt_time_s + 1e-9).floor() as u64;
    let success_prob = 1.0 - (1.0 - per_attempt).powi(attempts.min(i32::MAX as u64) as i32);
    Ok(RateReport {
        per_attempt,
        attempts,
        success_prob,
        ebits_per_s: 1.0 / (n_rounds as f64 * window_s),
    })
}
