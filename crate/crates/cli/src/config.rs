use serde::{Deserialize, Serialize};

use pwi_core::model::DEFAULT_TIE_TOL;
use pwi_core::scoring::{DEFAULT_BIG_M, DEFAULT_CAP, DEFAULT_DELTA};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_DISPERSION: usize = 5;

/// Numeric settings shared by all commands. Paths are kept out so that the
/// serialized config is identical across output directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub samples: u64,
    pub seed: u64,
    pub delta: f64,
    pub big_m: f64,
    pub cap: usize,
    pub tie_tol: f64,
    pub dispersion: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            delta: DEFAULT_DELTA,
            big_m: DEFAULT_BIG_M,
            cap: DEFAULT_CAP,
            tie_tol: DEFAULT_TIE_TOL,
            dispersion: DEFAULT_DISPERSION,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::Input(msg));
        if self.samples < 1 {
            return fail("--samples must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("--delta must be positive, got {}", self.delta));
        }
        if !(self.big_m >= 1.0 + self.delta && self.big_m.is_finite()) {
            return fail(format!(
                "--big-m must be at least 1 + delta = {}, got {}",
                1.0 + self.delta,
                self.big_m
            ));
        }
        if self.cap < 1 {
            return fail("--cap must be at least 1".into());
        }
        if !(self.tie_tol >= 0.0) {
            return fail(format!("--tie-tol must be non-negative, got {}", self.tie_tol));
        }
        if self.dispersion < 1 {
            return fail("--dispersion must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        AnalysisConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_small_big_m() {
        let c = AnalysisConfig {
            delta: 0.5,
            big_m: 1.4,
            ..AnalysisConfig::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            samples: 0,
            ..AnalysisConfig::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            delta: 0.0,
            ..AnalysisConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
