use crate::config::SuiteConfig;
use serde::Serialize;
use std::collections::BTreeMap;

pub const REPORT_SCHEMA: &str = "report-v1";

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Which mathematical claim the check certifies.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    /// `true` when the residual is on the healthy side of the tolerance
    /// (below it for accuracy checks, above it for falsifiability
    /// controls).
    pub pass: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub suite: String,
    pub degree: usize,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance_overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn new(cfg: &SuiteConfig, mut checks: Vec<CheckRecord>) -> Report {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema: REPORT_SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            config: ConfigEcho {
                suite: cfg.suite.name().to_string(),
                degree: cfg.degree,
                points: cfg.points,
                trials: cfg.trials,
                seed: cfg.seed,
                tolerance_overrides: cfg.tolerance_overrides.clone(),
            },
            checks,
            pass,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
