//! Network evaluation on a stored cloud.

use crate::cloud_io::{load_cloud, CloudError, CloudFormat};
use equivkernel::irrep::{compose_tfn, NetworkSpec};
use serde::Serialize;
use std::fs;
use std::path::Path;
use thiserror::Error;

pub const OUTPUT_SCHEMA: &str = "network-output-v1";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    Network(#[from] equivkernel::Error),
}

#[derive(Debug, Serialize)]
pub struct NetworkOutput {
    pub schema: &'static str,
    /// Block degrees of each per-point output.
    pub signature: Vec<usize>,
    /// One entry per point; each entry lists its blocks as value arrays.
    pub points: Vec<Vec<Vec<f64>>>,
}

/// Loads a network description and a cloud, evaluates, and returns the
/// per-point block values.
pub fn evaluate_network(
    spec_path: &Path,
    cloud_path: &Path,
    format: CloudFormat,
) -> Result<NetworkOutput, EvalError> {
    let spec_text = fs::read_to_string(spec_path).map_err(|source| EvalError::Read {
        path: spec_path.display().to_string(),
        source,
    })?;
    let spec = NetworkSpec::from_json_str(&spec_text)?;
    let cloud = load_cloud(cloud_path, format)?;
    let out = compose_tfn(&spec, &cloud)?;
    let signature = spec.target.degrees().to_vec();
    let points = out
        .iter()
        .map(|v| {
            (0..v.signature().num_blocks())
                .map(|k| v.block(k).to_vec())
                .collect()
        })
        .collect();
    Ok(NetworkOutput { schema: OUTPUT_SCHEMA, signature, points })
}
