//! Numerical Clebsch-Gordan decomposition.
//!
//! The product of two degree blocks contains each degree
//! `L = |l1 - l2| ... l1 + l2` exactly once. Rather than tabulating
//! coefficients (and inheriting someone else's phase conventions), the
//! intertwiner is solved for numerically against this crate's own basis:
//!
//! 1. build the product-representation generators
//!    `K_a = G_a^{(l1)} x I + I x G_a^{(l2)}`,
//! 2. eigendecompose the Casimir `sum_a K_a^2`; the eigenspace at
//!    `-L(L+1)` is the degree-`L` isotypic component (dimension `2L + 1`,
//!    which doubles as the multiplicity check),
//! 3. inside each eigenspace, solve the small intertwining constraint
//!    `B N_a = G_a^{(L)} B` for the change of basis back to the pinned
//!    solid-harmonic convention, and
//! 4. orthonormalize and fix the sign.
//!
//! Signature pairs reuse the cached single-degree blocks: the full
//! intertwiner is a block permutation of per-pair blocks and is applied
//! without ever materializing the dense matrix unless asked.

use super::wigner::wigner_generators;
use super::IrrepSignature;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::ops::AddAssign;
use std::sync::{Arc, Mutex, OnceLock};

/// Orthogonal decomposition of one product `W_{l1} (x) W_{l2}`, rows grouped
/// by ascending output degree.
#[derive(Debug, Clone)]
pub struct PairDecomposition {
    pub l1: usize,
    pub l2: usize,
    /// Ascending degrees `|l1 - l2| ..= l1 + l2`.
    pub degrees: Vec<usize>,
    /// Orthogonal `(d1 d2) x (d1 d2)` matrix; input index `(p, q)` flattens
    /// with the left factor slowest.
    pub u: DMatrix<f64>,
}

type PairCache = Mutex<HashMap<(usize, usize), Arc<PairDecomposition>>>;

fn pair_cache() -> &'static PairCache {
    static CACHE: OnceLock<PairCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Decomposes a single degree pair, memoized.
pub fn pair_decomposition(l1: usize, l2: usize) -> Result<Arc<PairDecomposition>> {
    if let Some(hit) = pair_cache().lock().expect("cg cache poisoned").get(&(l1, l2)) {
        return Ok(hit.clone());
    }
    let computed = Arc::new(compute_pair(l1, l2)?);
    pair_cache()
        .lock()
        .expect("cg cache poisoned")
        .insert((l1, l2), computed.clone());
    Ok(computed)
}

fn compute_pair(l1: usize, l2: usize) -> Result<PairDecomposition> {
    let (d1, d2) = (2 * l1 + 1, 2 * l2 + 1);
    let dim = d1 * d2;
    let g1 = wigner_generators(l1);
    let g2 = wigner_generators(l2);
    let eye1 = DMatrix::<f64>::identity(d1, d1);
    let eye2 = DMatrix::<f64>::identity(d2, d2);
    let k: Vec<DMatrix<f64>> =
        (0..3).map(|a| g1[a].kronecker(&eye2) + eye1.kronecker(&g2[a])).collect();
    let mut casimir = DMatrix::<f64>::zeros(dim, dim);
    for ka in &k {
        casimir += ka * ka;
    }
    // Symmetrize against rounding before the eigensolve.
    let casimir = (&casimir + casimir.transpose()) * 0.5;
    let eig = casimir.symmetric_eigen();

    let l_min = l1.abs_diff(l2);
    let l_max = l1 + l2;
    let scale = (l_max * (l_max + 1)) as f64;
    // Assign each eigenvector to the nearest admissible degree.
    let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let mut best = l_min;
        let mut best_err = f64::INFINITY;
        for cand in l_min..=l_max {
            let target = -((cand * (cand + 1)) as f64);
            let err = (lambda - target).abs();
            if err < best_err {
                best_err = err;
                best = cand;
            }
        }
        if best_err > 1e-6 * (1.0 + scale) {
            return Err(Error::CgMultiplicityMismatch {
                l1,
                l2,
                detail: format!("stray Casimir eigenvalue {lambda:.6}"),
            });
        }
        buckets.entry(best).or_default().push(i);
    }

    let mut u = DMatrix::<f64>::zeros(dim, dim);
    let mut degrees = Vec::new();
    let mut row_offset = 0;
    for l_out in l_min..=l_max {
        let dl = 2 * l_out + 1;
        let idx = buckets.remove(&l_out).unwrap_or_default();
        if idx.len() != dl {
            return Err(Error::CgMultiplicityMismatch {
                l1,
                l2,
                detail: format!(
                    "degree {l_out}: eigenspace dimension {} != expected {dl}",
                    idx.len()
                ),
            });
        }
        let mut q = DMatrix::<f64>::zeros(dim, dl);
        for (c, &i) in idx.iter().enumerate() {
            q.column_mut(c).copy_from(&eig.eigenvectors.column(i));
        }
        // Clustered eigenvectors can lose orthogonality at the eps level.
        let q = q.qr().q();
        let block = pair_block(&q, &k, l_out, l1, l2)?;
        u.rows_mut(row_offset, dl).copy_from(&block);
        degrees.push(l_out);
        row_offset += dl;
    }
    Ok(PairDecomposition { l1, l2, degrees, u })
}

/// Change of basis from the eigenspace `q` back to the pinned degree-`L`
/// convention: solve `B N_a = G_a^{(L)} B` for all three axes, normalize,
/// fix the sign.
fn pair_block(
    q: &DMatrix<f64>,
    k: &[DMatrix<f64>],
    l_out: usize,
    l1: usize,
    l2: usize,
) -> Result<DMatrix<f64>> {
    let dl = 2 * l_out + 1;
    let gl = wigner_generators(l_out);
    let eye = DMatrix::<f64>::identity(dl, dl);
    let mut stacked = DMatrix::<f64>::zeros(3 * dl * dl, dl * dl);
    for a in 0..3 {
        let n_a = q.transpose() * &k[a] * q;
        // vec(B N_a) = (N_a^T x I) vec(B); vec(G B) = (I x G) vec(B).
        let block = n_a.transpose().kronecker(&eye) - eye.kronecker(&gl[a]);
        stacked.rows_mut(a * dl * dl, dl * dl).copy_from(&block);
    }
    let svd = stacked.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv[0].max(1.0);
    let nulls = sv.iter().filter(|&&s| s < 1e-7 * smax).count();
    if nulls != 1 {
        return Err(Error::CgMultiplicityMismatch {
            l1,
            l2,
            detail: format!("degree {l_out}: intertwiner space has dimension {nulls}, not 1"),
        });
    }
    let v_t = svd.v_t.expect("svd computed with V");
    let vec_b = v_t.row(v_t.nrows() - 1).transpose();
    let mut b = DMatrix::<f64>::from_column_slice(dl, dl, vec_b.as_slice());
    // The solution is a scalar multiple of an orthogonal matrix.
    let c = (b.norm_squared() / dl as f64).sqrt();
    b /= c;
    let ortho_err = (&b * b.transpose() - &eye).abs().max();
    if ortho_err > 1e-8 {
        return Err(Error::CgMultiplicityMismatch {
            l1,
            l2,
            detail: format!("degree {l_out}: solved block not orthogonal ({ortho_err:.3e})"),
        });
    }
    let mut block = b * q.transpose();
    fix_sign(&mut block);
    Ok(block)
}

/// Makes the first above-threshold entry (row-major scan) positive.
fn fix_sign(block: &mut DMatrix<f64>) {
    let maxabs = block.abs().max();
    let thresh = 1e-6 * maxabs;
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            let e = block[(i, j)];
            if e.abs() > thresh {
                if e < 0.0 {
                    *block *= -1.0;
                }
                return;
            }
        }
    }
}

/// Output degrees of the decomposition of `lf (x) li`: block pairs `(j, k)`
/// in lexicographic order (left factor outermost), each contributing
/// `|l_j - l_k| ..= l_j + l_k` ascending.
pub fn cg_output_signature(lf: &IrrepSignature, li: &IrrepSignature) -> IrrepSignature {
    let mut degrees = Vec::new();
    for &a in lf.degrees() {
        for &b in li.degrees() {
            for l in a.abs_diff(b)..=(a + b) {
                degrees.push(l);
            }
        }
    }
    IrrepSignature::new(degrees)
}

pub(crate) struct PairPlacement {
    pub f_block: usize,
    pub i_block: usize,
    pub f_offset: usize,
    pub f_dim: usize,
    pub i_offset: usize,
    pub i_dim: usize,
    pub out_offset: usize,
    pub cg: Arc<PairDecomposition>,
}

/// Orthogonal intertwiner decomposing `W_lf (x) W_li` into a direct sum.
///
/// Stored as per-pair blocks; [`Intertwiner::dense`] materializes the full
/// matrix (rows orthonormal, `u u^T = u^T u = I`) when the dimensions make
/// that reasonable.
pub struct Intertwiner {
    lf: IrrepSignature,
    li: IrrepSignature,
    lout: IrrepSignature,
    pairs: Vec<PairPlacement>,
}

impl Intertwiner {
    pub fn lf(&self) -> &IrrepSignature {
        &self.lf
    }

    pub fn li(&self) -> &IrrepSignature {
        &self.li
    }

    pub fn lout(&self) -> &IrrepSignature {
        &self.lout
    }

    pub fn input_dim(&self) -> usize {
        self.lf.dim() * self.li.dim()
    }

    /// Applies the intertwiner to a flat product vector (left factor
    /// slowest).
    pub fn apply(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        if w.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "intertwiner input needs {} entries, got {}",
                    self.input_dim(),
                    w.len()
                ),
            });
        }
        let dim_i = self.li.dim();
        let mut out = DVector::zeros(self.lout.dim());
        let mut pair_buf = Vec::new();
        for p in &self.pairs {
            pair_buf.clear();
            pair_buf.reserve(p.f_dim * p.i_dim);
            for a in 0..p.f_dim {
                let row = (p.f_offset + a) * dim_i + p.i_offset;
                pair_buf.extend_from_slice(&w.as_slice()[row..row + p.i_dim]);
            }
            let sub = DVector::from_column_slice(&pair_buf);
            let mapped = &p.cg.u * sub;
            let pair_out = p.f_dim * p.i_dim;
            out.rows_mut(p.out_offset, pair_out).add_assign(&mapped);
        }
        Ok(out)
    }

    /// Applies the intertwiner to per-pair sub-tensors, indexed as
    /// [`Intertwiner::pair_layout`] reports. Each tensor is the `(j, k)`
    /// product block, left factor slowest.
    pub fn apply_pair_tensors(&self, tensors: &[DVector<f64>]) -> Result<DVector<f64>> {
        if tensors.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "expected {} pair tensors, got {}",
                    self.pairs.len(),
                    tensors.len()
                ),
            });
        }
        let mut out = DVector::zeros(self.lout.dim());
        for (p, t) in self.pairs.iter().zip(tensors) {
            if t.len() != p.f_dim * p.i_dim {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "pair ({},{}): tensor has {} entries, needs {}",
                        p.f_block,
                        p.i_block,
                        t.len(),
                        p.f_dim * p.i_dim
                    ),
                });
            }
            let mapped = &p.cg.u * t;
            out.rows_mut(p.out_offset, t.len()).add_assign(&mapped);
        }
        Ok(out)
    }

    /// `(f_block, i_block, f_dim, i_dim)` per pair, in storage order.
    pub fn pair_layout(&self) -> Vec<(usize, usize, usize, usize)> {
        self.pairs.iter().map(|p| (p.f_block, p.i_block, p.f_dim, p.i_dim)).collect()
    }

    /// Materializes the dense orthogonal matrix
    /// `dim(lout) x (dim(lf) * dim(li))`.
    pub fn dense(&self) -> DMatrix<f64> {
        let dim_i = self.li.dim();
        let cols = self.input_dim();
        let mut u = DMatrix::zeros(self.lout.dim(), cols);
        for p in &self.pairs {
            for r in 0..p.f_dim * p.i_dim {
                for a in 0..p.f_dim {
                    for b in 0..p.i_dim {
                        let col = (p.f_offset + a) * dim_i + (p.i_offset + b);
                        u[(p.out_offset + r, col)] = p.cg.u[(r, a * p.i_dim + b)];
                    }
                }
            }
        }
        u
    }
}

/// Builds the intertwiner for a signature pair from cached per-degree
/// blocks.
pub fn cg_decompose(lf: &IrrepSignature, li: &IrrepSignature) -> Result<Intertwiner> {
    let mut pairs = Vec::with_capacity(lf.num_blocks() * li.num_blocks());
    let mut out_offset = 0;
    for (j, &a) in lf.degrees().iter().enumerate() {
        for (k, &b) in li.degrees().iter().enumerate() {
            let cg = pair_decomposition(a, b)?;
            let f_dim = 2 * a + 1;
            let i_dim = 2 * b + 1;
            pairs.push(PairPlacement {
                f_block: j,
                i_block: k,
                f_offset: lf.block_offset(j),
                f_dim,
                i_offset: li.block_offset(k),
                i_dim,
                out_offset,
                cg,
            });
            out_offset += f_dim * i_dim;
        }
    }
    let lout = cg_output_signature(lf, li);
    debug_assert_eq!(out_offset, lout.dim());
    Ok(Intertwiner { lf: lf.clone(), li: li.clone(), lout, pairs })
}
