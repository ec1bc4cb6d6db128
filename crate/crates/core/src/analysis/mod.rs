//! Monte Carlo estimation, threshold fitting and closed-form models.

mod closed_form;
mod montecarlo;
mod report;
mod threshold;

pub use closed_form::{
    entanglement_rate, final_state_noise, long_chain_error, FidelityReport, RateReport,
};
pub use montecarlo::{
    estimate_logical_error_rate, trial_rng, wilson_interval, with_workers, Geometry, TrialBatch,
    TrialConfig, Z95,
};
pub use report::{read_rate_csv, to_json_line, write_rate_csv, RateRow};
pub use threshold::{
    estimate_threshold, fit_exponential_decay, fit_threshold_line, operational_threshold,
    operational_threshold_with, point_seed, DecayFit, SweepPoint, ThresholdEstimate, ThresholdFit,
    ThresholdLine, ThresholdOptions, ThresholdPoint,
};
