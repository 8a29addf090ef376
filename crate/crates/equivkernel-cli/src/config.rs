use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    So3,
    Tensor,
    Irrep,
    Spanning,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::So3 => "so3",
            Suite::Tensor => "tensor",
            Suite::Irrep => "irrep",
            Suite::Spanning => "spanning",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("degree must be at most 4, got {0}")]
    DegreeTooLarge(usize),
    #[error("at least 2 points are required, got {0}")]
    TooFewPoints(usize),
    #[error("at least 1 trial is required")]
    NoTrials,
    #[error("malformed tolerance override {0:?}, expected NAME=VALUE")]
    BadToleranceOverride(String),
    #[error("unknown check name in tolerance override: {0:?}")]
    UnknownCheck(String),
}

/// Validated configuration of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub degree: usize,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance_overrides: BTreeMap<String, f64>,
}

impl SuiteConfig {
    pub fn new(
        suite: Suite,
        degree: usize,
        points: usize,
        trials: usize,
        seed: u64,
        tol_args: &[String],
    ) -> Result<Self, ConfigError> {
        if degree > 4 {
            return Err(ConfigError::DegreeTooLarge(degree));
        }
        if points < 2 {
            return Err(ConfigError::TooFewPoints(points));
        }
        if trials < 1 {
            return Err(ConfigError::NoTrials);
        }
        let mut overrides = BTreeMap::new();
        for arg in tol_args {
            let (name, value) = arg
                .split_once('=')
                .ok_or_else(|| ConfigError::BadToleranceOverride(arg.clone()))?;
            let value: f64 = value
                .parse()
                .map_err(|_| ConfigError::BadToleranceOverride(arg.clone()))?;
            overrides.insert(name.to_string(), value);
        }
        Ok(SuiteConfig { suite, degree, points, trials, seed, tolerance_overrides: overrides })
    }
}
