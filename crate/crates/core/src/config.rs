//! Run configuration shared by the library harnesses and the CLI.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset, Format};
use crate::error::{invalid, Error, Result};
use crate::kernel::DEFAULT_SIGMA;
use crate::scoring::DEFAULT_U;
use crate::seed::{self, stream};
use crate::splitting::{Objective, SplitConfig, DEFAULT_EPS, DEFAULT_RESTARTS};

/// Default ridge term of the evaluation classifier.
pub const DEFAULT_LAMBDA: f64 = 0.1;
/// Default per-coordinate spread of generated blobs.
pub const DEFAULT_BLOB_SPREAD: f64 = 0.3;

/// Where a run's data comes from. Written as `blobs:CxP[:spread]`,
/// `disk:N`, or a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DatasetSource {
    Blobs {
        classes: usize,
        per_class: usize,
        spread: f64,
    },
    Disk {
        n: usize,
    },
    File(PathBuf),
}

impl FromStr for DatasetSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("blobs:") {
            let mut parts = rest.split(':');
            let shape = parts.next().unwrap_or_default();
            let (c, p) = shape.split_once('x').ok_or_else(|| {
                Error::InvalidInput(format!("bad blob shape {shape:?}, want CxP"))
            })?;
            let parse = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad blob count {v:?}")))
            };
            let spread = match parts.next() {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad blob spread {v:?}")))?,
                None => DEFAULT_BLOB_SPREAD,
            };
            return Ok(DatasetSource::Blobs {
                classes: parse(c)?,
                per_class: parse(p)?,
                spread,
            });
        }
        if let Some(n) = s.strip_prefix("disk:") {
            let n = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad disk size {n:?}")))?;
            return Ok(DatasetSource::Disk { n });
        }
        if s.is_empty() {
            return invalid("empty dataset source");
        }
        Ok(DatasetSource::File(PathBuf::from(s)))
    }
}

impl TryFrom<String> for DatasetSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Blobs {
                classes,
                per_class,
                spread,
            } => {
                write!(f, "blobs:{classes}x{per_class}:{spread}")
            }
            DatasetSource::Disk { n } => write!(f, "disk:{n}"),
            DatasetSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl From<DatasetSource> for String {
    fn from(s: DatasetSource) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sigma: f64,
    pub u: f64,
    pub lambda: f64,
    pub eps: f64,
    pub restarts: usize,
    pub seed: u64,
    pub objective: Objective,
    pub dataset: DatasetSource,
    pub format: Format,
    pub standardize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            u: DEFAULT_U,
            lambda: DEFAULT_LAMBDA,
            eps: DEFAULT_EPS,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            objective: Objective::Min,
            dataset: DatasetSource::Blobs {
                classes: 3,
                per_class: 50,
                spread: DEFAULT_BLOB_SPREAD,
            },
            format: Format::DenseCsv,
            standardize: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("eps", self.eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.u >= 0.0 && self.u.is_finite()) {
            return invalid(format!("u must be non-negative, got {}", self.u));
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Materialize the configured dataset. Generators draw from a sub-seed of
    /// the run seed.
    pub fn load_dataset(&self) -> Result<Dataset> {
        let gen_seed = seed::sub_seed(self.seed, stream::DATASET, 0);
        let d = match &self.dataset {
            DatasetSource::Blobs {
                classes,
                per_class,
                spread,
            } => dataset::generate_gaussian_blobs(*classes, *per_class, *spread, gen_seed)?,
            DatasetSource::Disk { n } => dataset::generate_uniform_disk(*n, gen_seed)?,
            DatasetSource::File(path) => dataset::load_dataset(path, self.format)?,
        };
        Ok(if self.standardize { d.standardize() } else { d })
    }

    pub fn split_config(&self, k: usize) -> SplitConfig {
        let mut s = SplitConfig::new(k, seed::sub_seed(self.seed, stream::SPLIT, 0));
        s.eps = self.eps;
        s.restarts = self.restarts;
        s.objective = self.objective;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_parsing() {
        assert_eq!(
            "blobs:3x50".parse::<DatasetSource>().unwrap(),
            DatasetSource::Blobs {
                classes: 3,
                per_class: 50,
                spread: DEFAULT_BLOB_SPREAD
            }
        );
        assert_eq!(
            "blobs:2x10:0.1".parse::<DatasetSource>().unwrap(),
            DatasetSource::Blobs {
                classes: 2,
                per_class: 10,
                spread: 0.1
            }
        );
        assert_eq!(
            "disk:400".parse::<DatasetSource>().unwrap(),
            DatasetSource::Disk { n: 400 }
        );
        assert!(matches!(
            "data/x.csv".parse::<DatasetSource>().unwrap(),
            DatasetSource::File(_)
        ));
        assert!("blobs:3".parse::<DatasetSource>().is_err());
        assert!("disk:abc".parse::<DatasetSource>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig {
            seed: 42,
            u: 0.25,
            objective: Objective::Max,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = RunConfig::from_json(r#"{"sigma": 2.5, "dataset": "disk:30"}"#).unwrap();
        assert_eq!(cfg.sigma, 2.5);
        assert_eq!(cfg.u, DEFAULT_U);
        assert_eq!(cfg.dataset, DatasetSource::Disk { n: 30 });
    }

    #[test]
    fn validation() {
        assert!(RunConfig {
            sigma: 0.0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            lambda: -1.0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            restarts: 0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            u: 0.0,
            ..RunConfig::default()
        }
        .validate()
        .is_ok());
        assert!(RunConfig::from_json(r#"{"sigma": -1}"#).is_err());
    }
}
