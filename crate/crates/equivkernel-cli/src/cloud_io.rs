//! Point-cloud file I/O.
//!
//! CSV: one point per line, three comma-separated reals. JSON: an array of
//! `[x, y, z]` arrays. Both round-trip finite doubles exactly (shortest
//! round-trip formatting on write).

use equivkernel::tensor::PointCloud;
use nalgebra::Vector3;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CloudFormat {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed row: {detail}")]
    MalformedRow { path: String, line: usize, detail: String },
    #[error("{path}: invalid JSON: {detail}")]
    MalformedJson { path: String, detail: String },
    #[error("{path}: a point cloud needs at least 2 points, found {n}")]
    TooFewPoints { path: String, n: usize },
    #[error("{path}: non-finite coordinate in point {index}")]
    NonFinite { path: String, index: usize },
}

pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud, CloudError> {
    let text = fs::read_to_string(path).map_err(|source| CloudError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let points = match format {
        CloudFormat::Csv => parse_csv(path, &text)?,
        CloudFormat::Json => parse_json(path, &text)?,
    };
    if points.len() < 2 {
        return Err(CloudError::TooFewPoints {
            path: path.display().to_string(),
            n: points.len(),
        });
    }
    if let Some(idx) = points.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(CloudError::NonFinite { path: path.display().to_string(), index: idx });
    }
    Ok(PointCloud::from_points(&points).expect("validated above"))
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<Vector3<f64>>, CloudError> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CloudError::MalformedRow {
                path: path.display().to_string(),
                line: i + 1,
                detail: format!("expected 3 comma-separated values, found {}", fields.len()),
            });
        }
        let mut coords = [0.0f64; 3];
        for (k, f) in fields.iter().enumerate() {
            coords[k] = f.parse().map_err(|_| CloudError::MalformedRow {
                path: path.display().to_string(),
                line: i + 1,
                detail: format!("cannot parse {f:?} as a real number"),
            })?;
        }
        points.push(Vector3::new(coords[0], coords[1], coords[2]));
    }
    Ok(points)
}

fn parse_json(path: &Path, text: &str) -> Result<Vec<Vector3<f64>>, CloudError> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| CloudError::MalformedJson {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != 3 {
                return Err(CloudError::MalformedJson {
                    path: path.display().to_string(),
                    detail: format!("point {i} has {} coordinates, expected 3", row.len()),
                });
            }
            Ok(Vector3::new(row[0], row[1], row[2]))
        })
        .collect()
}

pub fn save_cloud(path: &Path, format: CloudFormat, cloud: &PointCloud) -> Result<(), CloudError> {
    let text = match format {
        CloudFormat::Csv => {
            let mut s = String::new();
            for p in cloud.points() {
                s.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
            }
            s
        }
        CloudFormat::Json => {
            let rows: Vec<[f64; 3]> = cloud.points().map(|p| [p.x, p.y, p.z]).collect();
            serde_json::to_string_pretty(&rows).expect("plain floats serialize")
        }
    };
    fs::write(path, text).map_err(|source| CloudError::Write {
        path: path.display().to_string(),
        source,
    })
}
