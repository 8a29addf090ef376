//! Pointwise equivariant linear maps between direct sums of blocks.
//!
//! The only equivariant linear maps between irreducible blocks are zero
//! (different degrees) or scalar multiples of the identity (equal degrees),
//! so a map between direct sums is a matrix over block indices whose
//! entries are structurally zero wherever degrees differ. Construction
//! rejects any attempt to set such an entry.

use super::FeatureField;
use crate::error::{Error, Result};
use crate::so3::{IrrepSignature, IrrepVector};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfInteraction {
    l_in: IrrepSignature,
    l_out: IrrepSignature,
    /// `K_in x K_out` block coefficients.
    m: DMatrix<f64>,
}

impl SelfInteraction {
    /// Builds from sparse entries `(input block, output block, value)`.
    pub fn new(
        l_in: IrrepSignature,
        l_out: IrrepSignature,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut m = DMatrix::zeros(l_in.num_blocks(), l_out.num_blocks());
        for &(i, j, v) in entries {
            if i >= l_in.num_blocks() || j >= l_out.num_blocks() {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "self-interaction entry ({i},{j}) out of range for {} -> {}",
                        l_in, l_out
                    ),
                });
            }
            if l_in.degrees()[i] != l_out.degrees()[j] {
                return Err(Error::StructuralZero {
                    row: i,
                    col: j,
                    l_in: l_in.degrees()[i],
                    l_out: l_out.degrees()[j],
                });
            }
            m[(i, j)] = v;
        }
        Ok(SelfInteraction { l_in, l_out, m })
    }

    /// Identity on a signature.
    pub fn identity(sig: IrrepSignature) -> Self {
        let k = sig.num_blocks();
        SelfInteraction { l_in: sig.clone(), l_out: sig, m: DMatrix::identity(k, k) }
    }

    /// Number of block pairs with matching degrees — the free parameters of
    /// any map between these signatures.
    pub fn free_parameters(l_in: &IrrepSignature, l_out: &IrrepSignature) -> usize {
        l_in.degrees()
            .iter()
            .map(|a| l_out.degrees().iter().filter(|&&b| b == *a).count())
            .sum()
    }

    pub fn l_in(&self) -> &IrrepSignature {
        &self.l_in
    }

    pub fn l_out(&self) -> &IrrepSignature {
        &self.l_out
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Sparse view of the nonzero entries, for serialization.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.m.nrows() {
            for j in 0..self.m.ncols() {
                if self.m[(i, j)] != 0.0 {
                    out.push((i, j, self.m[(i, j)]));
                }
            }
        }
        out
    }

    pub fn apply_vector(&self, v: &IrrepVector) -> Result<IrrepVector> {
        if v.signature() != &self.l_in {
            return Err(Error::SignatureMismatch {
                expected: self.l_in.to_string(),
                found: v.signature().to_string(),
            });
        }
        let mut out = DVector::zeros(self.l_out.dim());
        for j in 0..self.l_out.num_blocks() {
            let dj = self.l_out.block_dim(j);
            let oj = self.l_out.block_offset(j);
            for i in 0..self.l_in.num_blocks() {
                let c = self.m[(i, j)];
                if c == 0.0 {
                    continue;
                }
                let oi = self.l_in.block_offset(i);
                for t in 0..dj {
                    out[oj + t] += c * v.data()[oi + t];
                }
            }
        }
        IrrepVector::new(self.l_out.clone(), out)
    }

    /// Applies the map at every point of a field.
    pub fn apply_field(&self, field: &FeatureField) -> Result<FeatureField> {
        let values = (0..field.n())
            .map(|j| Ok(self.apply_vector(&field.irrep_vector(j))?.data().clone()))
            .collect::<Result<Vec<_>>>()?;
        FeatureField::new(field.cloud().clone(), self.l_out.clone(), values)
    }
}
