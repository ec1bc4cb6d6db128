//! CSV rows and JSON records for batch results.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::montecarlo::TrialBatch;
use super::threshold::ThresholdEstimate;
use crate::topology::Sector;
use crate::Result;

/// One CSV row: a batch's counts in one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub lattice: String,
    pub d: usize,
    pub margin: Option<usize>,
    pub rounds: usize,
    pub ratio: Option<f64>,
    pub eps_s: f64,
    pub eps_e: f64,
    pub eps_c: f64,
    pub sector: String,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl RateRow {
    /// One row per sector.
    pub fn from_batch(batch: &TrialBatch) -> Vec<RateRow> {
        let cfg = &batch.config;
        Sector::ALL
            .iter()
            .map(|&s| {
                let (lo, hi) = batch.interval(s);
                RateRow {
                    lattice: cfg.geometry.label().to_string(),
                    d: cfg.geometry.size(),
                    margin: cfg.geometry.margin(),
                    rounds: cfg.n_rounds,
                    ratio: ratio(cfg.rates.eps_s, cfg.rates.eps_e),
                    eps_s: cfg.rates.eps_s,
                    eps_e: cfg.rates.eps_e,
                    eps_c: cfg.rates.eps_c,
                    sector: s.label().to_string(),
                    trials: batch.n_trials,
                    failures: batch.failures[s.index()],
                    rate: batch.rate(s),
                    wilson_lo: lo,
                    wilson_hi: hi,
                }
            })
            .collect()
    }

    /// Pooled rows of a threshold sweep (sector `both`).
    pub fn from_estimate(est: &ThresholdEstimate) -> Vec<RateRow> {
        est.points
            .iter()
            .map(|p| {
                let (lo, hi) = p.interval();
                RateRow {
                    lattice: "torus".into(),
                    d: p.distance,
                    margin: None,
                    rounds: p.distance,
                    ratio: Some(est.ratio),
                    eps_s: p.eps_e * est.ratio,
                    eps_e: p.eps_e,
                    eps_c: 0.0,
                    sector: "both".into(),
                    trials: p.samples,
                    failures: p.failures,
                    rate: p.rate(),
                    wilson_lo: lo,
                    wilson_hi: hi,
                }
            })
            .collect()
    }
}

fn ratio(eps_s: f64, eps_e: f64) -> Option<f64> {
    (eps_e > 0.0).then(|| eps_s / eps_e)
}

pub fn write_rate_csv<W: Write>(out: W, rows: &[RateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rate_csv(text: &str) -> Result<Vec<RateRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One JSON object on one line.
pub fn to_json_line<T: Serialize>(record: &T) -> Result<String> {
    Ok(serde_json::to_string(record)?)
}
