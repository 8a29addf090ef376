//! Convolutional layers over direct sums of irreducible blocks.
//!
//! A layer tensors per-point features with a radially-weighted harmonic
//! filter evaluated on point differences, then decomposes back into
//! irreducible blocks through a Clebsch-Gordan intertwiner. Differences make
//! every layer translation invariant; the blockwise action keeps rotation
//! equivariance; summing over points keeps permutation equivariance.

mod conv;
mod filter;
mod network;
mod self_interact;

pub use conv::{alt_conv, tfn_conv, ConvKind, ConvLayer};
pub use filter::{filter_eval, FilterSpec};
pub use network::{compose_tfn, NetworkChannel, NetworkSpec};
pub use self_interact::SelfInteraction;

use crate::error::{Error, Result};
use crate::so3::{IrrepSignature, IrrepVector};
use crate::tensor::PointCloud;
use nalgebra::DVector;

/// A point cloud together with one irrep-valued feature per point, all
/// sharing a signature.
#[derive(Debug, Clone)]
pub struct FeatureField {
    cloud: PointCloud,
    sig: IrrepSignature,
    values: Vec<DVector<f64>>,
}

impl FeatureField {
    pub fn new(cloud: PointCloud, sig: IrrepSignature, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != cloud.n() {
            return Err(Error::PointCountMismatch { expected: cloud.n(), found: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| v.len() != sig.dim()) {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "feature of signature {sig} needs {} entries per point, got {}",
                    sig.dim(),
                    bad.len()
                ),
            });
        }
        Ok(FeatureField { cloud, sig, values })
    }

    /// The network input: the constant scalar feature `1` at every point.
    pub fn ext(cloud: &PointCloud) -> FeatureField {
        let n = cloud.n();
        FeatureField {
            cloud: cloud.clone(),
            sig: IrrepSignature::new(vec![0]),
            values: vec![DVector::from_element(1, 1.0); n],
        }
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn signature(&self) -> &IrrepSignature {
        &self.sig
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &DVector<f64> {
        &self.values[j]
    }

    pub fn irrep_vector(&self, j: usize) -> IrrepVector {
        IrrepVector::new(self.sig.clone(), self.values[j].clone()).expect("shape enforced")
    }

    /// Block `k` of the feature at point `j`.
    pub fn block(&self, j: usize, k: usize) -> &[f64] {
        let off = self.sig.block_offset(k);
        &self.values[j].as_slice()[off..off + self.sig.block_dim(k)]
    }
}
