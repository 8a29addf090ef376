//! Linear rotation-invariant functionals on tensor powers.
//!
//! Every invariant linear functional on an order-`D` tensor corresponds to a
//! multilinear invariant of `D` vector arguments, and those are spanned by
//! products of `3 x 3` determinants and pairwise inner products with the
//! arguments permuted. Evaluating such a product on all `3^D` standard-basis
//! tuples recovers the coefficient tensor. The spanned set is deliberately
//! redundant (e.g. `<w1,w2>` and `<w2,w1>` both appear); rank analysis
//! happens downstream.

use super::ops::{TensorFeature, MAX_TENSOR_ORDER};
use crate::error::{Error, Result};
use itertools::Itertools;
use nalgebra::{DVector, Matrix3, Vector3};

/// One functional: `k` determinant blocks, then inner-product blocks, with
/// the `D` arguments fed through the permutation `sigma`.
#[derive(Debug, Clone)]
pub struct InvariantFunctional {
    degree: usize,
    k: usize,
    sigma: Vec<usize>,
    coeffs: DVector<f64>,
}

impl InvariantFunctional {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn det_blocks(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }
}

/// Admissible determinant counts: `D - 3k` even and non-negative.
fn det_counts(degree: usize) -> Vec<usize> {
    (0..=degree / 3).filter(|&k| (degree - 3 * k).is_multiple_of(2)).collect()
}

/// Evaluates the base functional (no permutation) on a tuple of vectors.
fn base_value(k: usize, args: &[Vector3<f64>]) -> f64 {
    let mut acc = 1.0;
    for blk in 0..k {
        let m = Matrix3::from_columns(&[args[3 * blk], args[3 * blk + 1], args[3 * blk + 2]]);
        acc *= m.determinant();
    }
    let mut i = 3 * k;
    while i < args.len() {
        acc *= args[i].dot(&args[i + 1]);
        i += 2;
    }
    acc
}

/// Builds the full spanning family for degree `D`: one functional per
/// admissible `k` and per permutation of the `D` arguments. Degrees with no
/// admissible `k` (such as `D = 1`) yield an empty list — no invariants
/// exist there.
pub fn invariant_functionals(degree: usize) -> Result<Vec<InvariantFunctional>> {
    if degree > MAX_TENSOR_ORDER {
        return Err(Error::DegreeTooLarge { degree, max: MAX_TENSOR_ORDER });
    }
    let dim = 3usize.pow(degree as u32);
    let basis = [Vector3::x(), Vector3::y(), Vector3::z()];
    let sigmas: Vec<Vec<usize>> = if degree == 0 {
        vec![Vec::new()]
    } else {
        (0..degree).permutations(degree).collect()
    };
    let mut out = Vec::new();
    for k in det_counts(degree) {
        for sigma in &sigmas {
            let mut coeffs = DVector::zeros(dim);
            let mut idx = vec![0usize; degree];
            for flat in 0..dim {
                // Decode flat index, first factor slowest.
                let mut rem = flat;
                for t in (0..degree).rev() {
                    idx[t] = rem % 3;
                    rem /= 3;
                }
                let args: Vec<Vector3<f64>> = sigma.iter().map(|&s| basis[idx[s]]).collect();
                coeffs[flat] = base_value(k, &args);
            }
            out.push(InvariantFunctional { degree, k, sigma: sigma.clone(), coeffs });
        }
    }
    Ok(out)
}

/// Per-point pairing of the functional with an order-matching tensor.
pub fn apply_pool(lam: &InvariantFunctional, t: &TensorFeature) -> Result<Vec<f64>> {
    if lam.degree != t.order() {
        return Err(Error::OrderMismatch { functional: lam.degree, tensor: t.order() });
    }
    Ok((0..t.n()).map(|j| lam.coeffs.dot(t.point(j))).collect())
}
