//! The verification harness.
//!
//! Everything here treats a model as a black-box function from point clouds
//! to per-point feature vectors with a declared output representation, and
//! certifies properties numerically: equivariance under the full symmetry
//! group, spanning of the translation-invariant permutation-equivariant
//! polynomials through pointwise linear readouts, and the block structure
//! of equivariant linear maps under group averaging.

mod alpha;
mod equivariance;
mod spanning;

pub use alpha::{enumerate_alpha, p_alpha_basis, AlphaIndex};
pub use equivariance::{check_equivariance, schur_project, schur_project_many, symmetrize};
pub use spanning::{families, verify_d_spanning, NamedFeature, SpanningReport, TargetFit};

use crate::so3::{sample_rotation, IrrepSignature, Rotation};
use crate::tensor::PointCloud;
use nalgebra::{DVector, Vector3};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// One element of the symmetry group: translation, rotation, relabeling.
///
/// `src[j]` names which input point lands in output slot `j`; the same
/// reindexing applies to clouds and to per-point outputs.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub t: Vector3<f64>,
    pub r: Rotation,
    pub src: Vec<usize>,
}

impl GroupElement {
    /// `X -> R (X - t 1^T) P^T`.
    pub fn apply_to_cloud(&self, xc: &PointCloud) -> PointCloud {
        xc.translate(&(-self.t)).rotate(&self.r).permute(&self.src)
    }
}

/// Per-point output layout: a list of blocks, each rotating either as an
/// irreducible degree block or as a Kronecker tensor power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepBlock {
    Irrep(usize),
    TensorPow(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRep {
    blocks: Vec<RepBlock>,
}

impl OutputRep {
    pub fn new(blocks: Vec<RepBlock>) -> Self {
        OutputRep { blocks }
    }

    pub fn irreps(sig: &IrrepSignature) -> Self {
        OutputRep { blocks: sig.degrees().iter().map(|&l| RepBlock::Irrep(l)).collect() }
    }

    pub fn tensor_power(order: usize) -> Self {
        OutputRep { blocks: vec![RepBlock::TensorPow(order)] }
    }

    pub fn scalar() -> Self {
        OutputRep { blocks: vec![RepBlock::Irrep(0)] }
    }

    pub fn dim(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                RepBlock::Irrep(l) => 2 * l + 1,
                RepBlock::TensorPow(k) => 3usize.pow(*k as u32),
            })
            .sum()
    }

    /// Applies the rotation blockwise to one per-point value.
    pub fn rotate(&self, r: &Rotation, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        let mut off = 0;
        for b in &self.blocks {
            match b {
                RepBlock::Irrep(l) => {
                    let d = 2 * l + 1;
                    let block = v.rows(off, d);
                    out.rows_mut(off, d)
                        .copy_from(&(crate::so3::wigner_d(*l, r) * block));
                    off += d;
                }
                RepBlock::TensorPow(k) => {
                    let d = 3usize.pow(*k as u32);
                    let block = v.rows(off, d).into_owned();
                    out.rows_mut(off, d)
                        .copy_from(&crate::tensor::apply_kron_rot(r, *k, &block));
                    off += d;
                }
            }
        }
        out
    }

    /// Full output action of a group element (translation ignored):
    /// reindex points, rotate blocks.
    pub fn act(&self, g: &GroupElement, values: &[DVector<f64>]) -> Vec<DVector<f64>> {
        g.src.iter().map(|&s| self.rotate(&g.r, &values[s])).collect()
    }
}

/// Deterministic per-trial seed derivation (splitmix64 step).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// I.i.d. standard Gaussian coordinates: generic position with probability
/// one, well-conditioned moment matrices.
pub fn gaussian_cloud<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PointCloud {
    let pts: Vec<Vector3<f64>> = (0..n)
        .map(|_| {
            Vector3::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            )
        })
        .collect();
    PointCloud::from_points(&pts).expect("gaussian draws are finite")
}

/// Random group element with Gaussian translation, Haar rotation, uniform
/// relabeling.
pub fn sample_group_element(n: usize, rng: &mut ChaCha8Rng) -> GroupElement {
    let t = Vector3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    );
    let r = sample_rotation(rng);
    let mut src: Vec<usize> = (0..n).collect();
    src.shuffle(rng);
    GroupElement { t, r, src }
}
