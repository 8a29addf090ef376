//! Rotation-group primitives.
//!
//! Everything downstream is anchored on two conventions fixed here and
//! documented in [`CONVENTIONS`]:
//!
//! - the real solid-harmonic basis returned by [`real_sph_harm`], with
//!   `Y^0 = [1]` and `Y^1(x) = (x, y, z)`, and
//! - the block matrices [`wigner_d`] defined by covariance against that
//!   basis, `Y^l(R x) = D^l(R) Y^l(x)`, which makes `D^1(R) = R` literal.
//!
//! Clebsch-Gordan intertwiners are computed numerically from those matrices
//! rather than from tabulated coefficients, so the basis choice is the single
//! source of truth.

mod cg;
mod harmonics;
mod quadrature;
mod rotation;
mod wigner;

pub use cg::{cg_decompose, cg_output_signature, Intertwiner, PairDecomposition};
pub use harmonics::{real_sph_harm, real_sph_harm_all};
pub use quadrature::{haar_quadrature, QuadratureRule};
pub use rotation::{sample_rotation, Rotation, ROTATION_TOL};
pub use wigner::{wigner_d, wigner_generators};

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Basis ordering, sign rules and quadrature layout, pinned as a versioned
/// text artifact.
pub const CONVENTIONS: &str = include_str!("conventions.md");

/// An ordered list of irreducible-block degrees `(l_1, ..., l_K)`.
///
/// The direct sum it describes has one block of dimension `2 l_k + 1` per
/// entry, stored consecutively in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct IrrepSignature(Vec<usize>);

impl IrrepSignature {
    pub fn new(degrees: Vec<usize>) -> Self {
        IrrepSignature(degrees)
    }

    /// The signature `(0, 1, ..., max_degree)`.
    pub fn range(max_degree: usize) -> Self {
        IrrepSignature((0..=max_degree).collect())
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    /// Total dimension of the direct sum.
    pub fn dim(&self) -> usize {
        self.0.iter().map(|&l| 2 * l + 1).sum()
    }

    /// Offset of block `k` in the flat storage.
    pub fn block_offset(&self, k: usize) -> usize {
        self.0[..k].iter().map(|&l| 2 * l + 1).sum()
    }

    pub fn block_dim(&self, k: usize) -> usize {
        2 * self.0[k] + 1
    }

    pub fn max_degree(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl std::fmt::Display for IrrepSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A vector in a direct sum of irreducible blocks, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepVector {
    sig: IrrepSignature,
    data: DVector<f64>,
}

impl IrrepVector {
    pub fn new(sig: IrrepSignature, data: DVector<f64>) -> Result<Self> {
        if data.len() != sig.dim() {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "irrep vector of signature {} needs {} entries, got {}",
                    sig,
                    sig.dim(),
                    data.len()
                ),
            });
        }
        Ok(IrrepVector { sig, data })
    }

    pub fn zero(sig: IrrepSignature) -> Self {
        let dim = sig.dim();
        IrrepVector { sig, data: DVector::zeros(dim) }
    }

    pub fn signature(&self) -> &IrrepSignature {
        &self.sig
    }

    pub fn data(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut DVector<f64> {
        &mut self.data
    }

    /// View of block `k` (length `2 l_k + 1`).
    pub fn block(&self, k: usize) -> &[f64] {
        let off = self.sig.block_offset(k);
        &self.data.as_slice()[off..off + self.sig.block_dim(k)]
    }

    /// Applies the block-diagonal action of `r`: block `k` is multiplied by
    /// the degree-`l_k` Wigner matrix.
    pub fn rotate(&self, r: &Rotation) -> IrrepVector {
        let mut out = DVector::zeros(self.data.len());
        for (k, &l) in self.sig.degrees().iter().enumerate() {
            let off = self.sig.block_offset(k);
            let d = wigner_d(l, r);
            let block = self.data.rows(off, 2 * l + 1);
            out.rows_mut(off, 2 * l + 1).copy_from(&(&d * block));
        }
        IrrepVector { sig: self.sig.clone(), data: out }
    }
}

/// Block-diagonal action of `r` on the direct sum described by `sig`.
pub fn signature_wigner(sig: &IrrepSignature, r: &Rotation) -> nalgebra::DMatrix<f64> {
    let dim = sig.dim();
    let mut out = nalgebra::DMatrix::zeros(dim, dim);
    for (k, &l) in sig.degrees().iter().enumerate() {
        let off = sig.block_offset(k);
        let d = wigner_d(l, r);
        out.view_mut((off, off), (2 * l + 1, 2 * l + 1)).copy_from(&d);
    }
    out
}
