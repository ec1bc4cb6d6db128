//! Flat key-value run configuration.
//!
//! ```toml
//! geometry = "torus"
//! distance = 5
//! eps_e = 0.02
//! ratio = 1.5
//! trials = 10000
//! seed = 42
//! ```
//!
//! Lists are comma-separated strings (`sizes = "5,7,9"`).

use serde::{Deserialize, Serialize};

use crate::analysis::{Geometry, ThresholdOptions, TrialConfig};
use crate::decoder::WeightConvention;
use crate::noise::{full_rates, EffectiveRates, PhysicalNoise};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `torus` (default) or `network`.
    pub geometry: Option<String>,
    pub distance: Option<usize>,
    pub alice_bob_distance: Option<usize>,
    pub margin: Option<usize>,
    pub rounds: Option<usize>,

    pub q: Option<f64>,
    pub p: Option<f64>,
    pub p_m: Option<f64>,

    pub eps_s: Option<f64>,
    pub eps_e: Option<f64>,
    pub eps_c: Option<f64>,
    pub ratio: Option<f64>,

    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<String>,
    /// `likelihood` (default) or `unit`.
    pub weights: Option<String>,

    pub sizes: Option<String>,
    pub ratios: Option<String>,
    pub grid: Option<String>,
    pub bootstrap: Option<usize>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `other` replace ours.
    pub fn merge(&mut self, other: &RunConfig) {
        merge_fields!(self, other; geometry, distance, alice_bob_distance, margin, rounds,
            q, p, p_m, eps_s, eps_e, eps_c, ratio, trials, seed, workers, output, weights,
            sizes, ratios, grid, bootstrap);
    }

    pub fn geometry(&self) -> Result<Geometry> {
        match self.geometry.as_deref().unwrap_or("torus") {
            "torus" => {
                if self.alice_bob_distance.is_some() || self.margin.is_some() {
                    return Err(Error::Config(
                        "alice_bob_distance and margin apply to the network geometry".into(),
                    ));
                }
                Ok(Geometry::Torus {
                    distance: required(self.distance, "distance")?,
                })
            }
            "network" => {
                if self.distance.is_some() {
                    return Err(Error::Config(
                        "distance applies to the torus geometry".into(),
                    ));
                }
                Ok(Geometry::Network {
                    alice_bob_distance: required(self.alice_bob_distance, "alice_bob_distance")?,
                    margin: required(self.margin, "margin")?,
                })
            }
            other => Err(Error::Config(format!("unknown geometry `{other}`"))),
        }
    }

    pub fn physical(&self) -> Result<PhysicalNoise> {
        PhysicalNoise::new(
            self.q.unwrap_or(0.0),
            self.p.unwrap_or(0.0),
            self.p_m.unwrap_or(0.0),
        )
    }

    /// Phenomenological rates from either the `eps_*` keys or the physical
    /// parameters, never both. Nothing set means noiseless.
    pub fn rates(&self) -> Result<EffectiveRates> {
        let phenomenological = self.eps_s.is_some()
            || self.eps_e.is_some()
            || self.eps_c.is_some()
            || self.ratio.is_some();
        let physical = self.q.is_some() || self.p.is_some() || self.p_m.is_some();
        match (phenomenological, physical) {
            (true, true) => Err(Error::Config(
                "give either eps_s/eps_e/eps_c/ratio or q/p/p_m, not both".into(),
            )),
            (false, false) => Ok(EffectiveRates::zero()),
            (false, true) => full_rates(self.physical()?),
            (true, false) => {
                let eps_e = required(self.eps_e, "eps_e")?;
                let eps_s = match (self.eps_s, self.ratio) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config("give either eps_s or ratio, not both".into()))
                    }
                    (Some(s), None) => s,
                    (None, Some(r)) => {
                        if !(r > 0.0) {
                            return Err(Error::out_of_range("ratio", r, "(0, inf)"));
                        }
                        r * eps_e
                    }
                    (None, None) => eps_e,
                };
                EffectiveRates::new(eps_s, eps_e, self.eps_c.unwrap_or(0.0))
            }
        }
    }

    pub fn convention(&self) -> Result<WeightConvention> {
        match self.weights.as_deref().unwrap_or("likelihood") {
            "likelihood" => Ok(WeightConvention::Likelihood),
            "unit" => Ok(WeightConvention::Unit),
            other => Err(Error::Config(format!("unknown weights `{other}`"))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Rounds default to the torus distance or the network margin.
    pub fn trial_config(&self) -> Result<TrialConfig> {
        let geometry = self.geometry()?;
        let n_rounds = self.rounds.unwrap_or(match geometry {
            Geometry::Torus { distance } => distance,
            Geometry::Network { margin, .. } => margin,
        });
        if n_rounds == 0 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        Ok(TrialConfig {
            geometry,
            rates: self.rates()?,
            n_rounds,
            seed: self.seed(),
            convention: self.convention()?,
        })
    }

    pub fn trials(&self) -> Result<u64> {
        match self.trials.unwrap_or(1000) {
            0 => Err(Error::Config("trials must be >= 1".into())),
            n => Ok(n),
        }
    }

    pub fn threshold_options(&self) -> Result<ThresholdOptions> {
        let sizes = parse_list(self.sizes.as_deref().unwrap_or("5,7,9"), "sizes")?;
        let mut opts = ThresholdOptions::new(sizes, self.trials()?, self.seed());
        if let Some(g) = &self.grid {
            opts.grid = parse_list(g, "grid")?;
        }
        if let Some(b) = self.bootstrap {
            opts.bootstrap = b;
        }
        opts.convention = self.convention()?;
        Ok(opts)
    }

    pub fn ratio_list(&self) -> Result<Vec<f64>> {
        match (&self.ratios, self.ratio) {
            (Some(_), Some(_)) => Err(Error::Config("give either ratios or ratio".into())),
            (Some(r), None) => parse_list(r, "ratios"),
            (None, Some(r)) => Ok(vec![r]),
            (None, None) => Ok(vec![1.0, 1.5, 2.0, 2.5, 3.0]),
        }
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing `{name}`")))
}

/// Comma-separated numbers.
pub fn parse_list<T: std::str::FromStr>(text: &str, name: &str) -> Result<Vec<T>> {
    let out: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("bad entry `{s}` in `{name}`")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("`{name}` is empty")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn torus_config() {
        let cfg =
            RunConfig::parse("distance = 5\neps_e = 0.02\nratio = 1.5\ntrials = 100\nseed = 42\n")
                .unwrap();
        let t = cfg.trial_config().unwrap();
        assert_eq!(t.geometry, Geometry::Torus { distance: 5 });
        assert_eq!(t.n_rounds, 5);
        assert!((t.rates.eps_s - 0.03).abs() < 1e-15);
        assert_eq!(t.seed, 42);
        assert_eq!(cfg.trials().unwrap(), 100);
    }

    #[test]
    fn network_config_from_physical_noise() {
        let cfg = RunConfig::parse(
            "geometry = \"network\"\nalice_bob_distance = 4\nmargin = 3\nq = 0.01\np = 0.001\n",
        )
        .unwrap();
        let t = cfg.trial_config().unwrap();
        assert_eq!(t.n_rounds, 3);
        assert!((t.rates.eps_s - 0.0282667).abs() < 1e-7);
        assert!((t.rates.eps_c - 0.0005333).abs() < 1e-7);
    }

    #[test]
    fn rejects_unknown_keys_and_mixed_noise() {
        assert!(matches!(
            RunConfig::parse("distanse = 3"),
            Err(Error::Config(_))
        ));
        let mixed = RunConfig::parse("distance = 3\nq = 0.01\neps_e = 0.01").unwrap();
        assert!(mixed.rates().is_err());
        let both = RunConfig::parse("distance = 3\neps_s = 0.01\neps_e = 0.01\nratio = 2").unwrap();
        assert!(both.rates().is_err());
        let wrong = RunConfig::parse("geometry = \"torus\"\nmargin = 3\ndistance = 3").unwrap();
        assert!(wrong.geometry().is_err());
        assert!(RunConfig::parse("distance = \"three\"").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut file = RunConfig::parse("distance = 3\nseed = 1\ntrials = 10").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        file.merge(&flags);
        assert_eq!(file.seed, Some(9));
        assert_eq!(file.trials, Some(10));
    }

    #[test]
    fn lists() {
        let cfg = RunConfig::parse("sizes = \"3, 5\"\nratios = \"1,2\"\ngrid = \"0.01,0.02,0.03\"")
            .unwrap();
        let o = cfg.threshold_options().unwrap();
        assert_eq!(o.sizes, vec![3, 5]);
        assert_eq!(o.grid.len(), 3);
        assert_eq!(cfg.ratio_list().unwrap(), vec![1.0, 2.0]);
        assert!(parse_list::<usize>("3,x", "sizes").is_err());
        assert!(parse_list::<usize>(" , ", "sizes").is_err());
    }

    proptest! {
        #[test]
        fn toml_round_trip(
            distance in proptest::option::of(2usize..20),
            eps_e in proptest::option::of(0.0f64..0.2),
            seed in proptest::option::of(any::<u64>()),
            output in proptest::option::of("[a-z]{1,8}\\.csv"),
        ) {
            let cfg = RunConfig { distance, eps_e, seed, output, ..Default::default() };
            let text = cfg.to_toml().unwrap();
            prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        }
    }
}
