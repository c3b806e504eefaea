use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blockwise::MAX_TAG_BITS;
use crate::prob::Pmf;
use crate::typicality::GammaSchedule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeSpec {
    Blockwise { ell: f64 },
    Symbolwise { modulus: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    #[default]
    Exact,
    MonteCarlo {
        trials: u64,
    },
}

/// One sweep over blocklengths. Loaded from TOML, for example:
///
/// ```toml
/// source = [0.7, 0.3]
/// n_values = [4, 8, 12]
/// seed = 7
///
/// [scheme]
/// kind = "blockwise"
/// ell = 0.5
///
/// [schedule]
/// kind = "power_law"
/// exponent = 0.3333333333333333
///
/// [mode]
/// kind = "monte_carlo"
/// trials = 1000000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: Pmf,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub schedule: GammaSchedule,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if self.n_values[0] == 0 {
            return Err(Error::Config("blocklengths must be positive".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_values must be strictly increasing".into()));
        }
        self.schedule
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.scheme {
            SchemeSpec::Blockwise { ell } => {
                if !(ell >= 0.0 && ell.is_finite()) {
                    return Err(Error::Config(format!(
                        "ell must be non-negative, got {ell}"
                    )));
                }
                let n_max = *self.n_values.last().expect("non-empty");
                if n_max as f64 * ell > MAX_TAG_BITS {
                    return Err(Error::Config(format!(
                        "n * ell = {} exceeds {MAX_TAG_BITS} bits",
                        n_max as f64 * ell
                    )));
                }
            }
            SchemeSpec::Symbolwise { modulus } => {
                if modulus < self.source.support_size() {
                    return Err(Error::Config(format!(
                        "modulus {modulus} is below the source alphabet size {}",
                        self.source.support_size()
                    )));
                }
            }
        }
        if let ModeSpec::MonteCarlo { trials: 0 } = self.mode {
            return Err(Error::Config("monte_carlo mode needs trials >= 1".into()));
        }
        Ok(())
    }
}
