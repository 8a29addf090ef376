//! Slow, literal reference evaluators.
//!
//! Each function here recomputes a quantity by the most direct route
//! available — nested sums, explicit group averages — independent of the
//! factored production paths. The verification suites pair them against the
//! fast implementations; keep them dumb.

use crate::error::Result;
use crate::so3::QuadratureRule;
use crate::tensor::{kron_pow, MultiIndexR, PointCloud, TensorFeature};
use nalgebra::{DMatrix, DVector};

/// Literal nested-sum evaluation of the power-sum tensor feature:
/// `Q_j = sum over i_2..i_K of x_j^{(x)r1} (x) x_{i2}^{(x)r2} (x) ...`.
/// Cost grows like `n^{K-1}`; only viable at desk scale.
pub fn q_r_nested(xc: &PointCloud, r: &MultiIndexR) -> Result<TensorFeature> {
    let n = xc.n();
    let entries = r.entries();
    let order = r.total();
    let dim = 3usize.pow(order as u32);
    let tail_len = entries.len().saturating_sub(1);
    let mut data = Vec::with_capacity(n);
    for j in 0..n {
        let head = kron_pow(&xc.point(j), entries.first().copied().unwrap_or(0));
        let mut acc = DVector::zeros(dim);
        let mut indices = vec![0usize; tail_len];
        loop {
            let mut term = head.clone();
            for (pos, &i) in indices.iter().enumerate() {
                term = kron_dv(&term, &kron_pow(&xc.point(i), entries[pos + 1]));
            }
            acc += term;
            // Odometer over (i_2, ..., i_K).
            let mut carry = true;
            for d in (0..tail_len).rev() {
                if carry {
                    indices[d] += 1;
                    if indices[d] == n {
                        indices[d] = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        data.push(acc);
    }
    TensorFeature::new(order, data)
}

fn kron_dv(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Literal nested-sum evaluation of the permutation-equivariant polynomial
/// `p_j = sum over i_2..i_K of x_j^{a1} x_{i2}^{a2} ...` with 3-component
/// multi-index exponents.
pub fn p_alpha_nested(xc: &PointCloud, alphas: &[[usize; 3]]) -> Vec<f64> {
    let n = xc.n();
    let tail_len = alphas.len().saturating_sub(1);
    let mono = |j: usize, a: &[usize; 3]| -> f64 {
        let p = xc.point(j);
        p.x.powi(a[0] as i32) * p.y.powi(a[1] as i32) * p.z.powi(a[2] as i32)
    };
    (0..n)
        .map(|j| {
            let head = alphas.first().map(|a| mono(j, a)).unwrap_or(1.0);
            let mut acc = 0.0;
            let mut indices = vec![0usize; tail_len];
            loop {
                let mut term = head;
                for (pos, &i) in indices.iter().enumerate() {
                    term *= mono(i, &alphas[pos + 1]);
                }
                acc += term;
                let mut carry = true;
                for d in (0..tail_len).rev() {
                    if carry {
                        indices[d] += 1;
                        if indices[d] == n {
                            indices[d] = 0;
                        } else {
                            carry = false;
                        }
                    }
                }
                if carry {
                    break;
                }
            }
            acc
        })
        .collect()
}

/// Dimension of the rotation-invariant subspace of the order-`k` tensor
/// power, via the group-average projection `P = sum_i w_i R_i^{(x)k}`
/// followed by a rank count. The quadrature band limit must be at least `k`.
pub fn invariant_subspace_dim(order: usize, quad: &QuadratureRule) -> usize {
    let dim = 3usize.pow(order as u32);
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    for (r, w) in quad.iter() {
        let mut kron = DMatrix::<f64>::from_element(1, 1, 1.0);
        let m = DMatrix::<f64>::from_fn(3, 3, |i, j| r.matrix()[(i, j)]);
        for _ in 0..order {
            kron = kron.kronecker(&m);
        }
        p += kron * w;
    }
    let svd = p.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > 0.5 * smax.max(1.0) * 1e-6).count()
}
