//! The permutation-equivariant polynomial basis
//! `p_j = x_j^{a_1} * prod_{k>=2} (sum_i x_i^{a_k})`.
//!
//! The head exponent may be zero (point-independent polynomials); tail
//! exponents are nonzero and, since the summed factors commute, stored in a
//! canonical sorted order so enumeration never lists the same polynomial
//! twice.

use crate::error::{Error, Result};
use crate::tensor::PointCloud;

/// A canonical exponent list: `alphas[0]` is the per-point head, the rest
/// are the summed factors, each a 3-component multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlphaIndex {
    alphas: Vec<[usize; 3]>,
}

impl AlphaIndex {
    /// Canonicalizes: tail entries must be nonzero; the tail is sorted.
    pub fn new(head: [usize; 3], tail: Vec<[usize; 3]>) -> Result<Self> {
        if tail.iter().any(|a| a.iter().all(|&e| e == 0)) {
            return Err(Error::NonCanonicalIndex {
                reason: "zero multi-index in a summed position".into(),
            });
        }
        let mut tail = tail;
        tail.sort_unstable_by_key(|a| (a[0] + a[1] + a[2], *a));
        let mut alphas = vec![head];
        alphas.extend(tail);
        Ok(AlphaIndex { alphas })
    }

    pub fn constant() -> Self {
        AlphaIndex { alphas: vec![[0, 0, 0]] }
    }

    pub fn head(&self) -> [usize; 3] {
        self.alphas[0]
    }

    pub fn tail(&self) -> &[[usize; 3]] {
        &self.alphas[1..]
    }

    pub fn alphas(&self) -> &[[usize; 3]] {
        &self.alphas
    }

    pub fn total_degree(&self) -> usize {
        self.alphas.iter().map(|a| a[0] + a[1] + a[2]).sum()
    }
}

impl std::fmt::Display for AlphaIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, a) in self.alphas.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{}{}{}", a[0], a[1], a[2])?;
        }
        Ok(())
    }
}

/// Evaluates the basis polynomial in factored form (the tail sums
/// separate), one value per point.
pub fn p_alpha_basis(xc: &PointCloud, a: &AlphaIndex) -> Vec<f64> {
    let n = xc.n();
    let mono = |j: usize, e: &[usize; 3]| -> f64 {
        let p = xc.point(j);
        p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32) * p.z.powi(e[2] as i32)
    };
    let mut tail_product = 1.0;
    for e in a.tail() {
        tail_product *= (0..n).map(|i| mono(i, e)).sum::<f64>();
    }
    let head = a.head();
    (0..n).map(|j| mono(j, &head) * tail_product).collect()
}

/// All canonical indices with total degree at most `max_degree`.
pub fn enumerate_alpha(max_degree: usize) -> Vec<AlphaIndex> {
    let nonzero: Vec<[usize; 3]> = multi_indices_up_to(max_degree)
        .into_iter()
        .filter(|a| a.iter().sum::<usize>() > 0)
        .collect();

    // Multisets over `nonzero`, non-decreasing positions, bounded total.
    fn tails(
        budget: usize,
        start: usize,
        pool: &[[usize; 3]],
        cur: &mut Vec<[usize; 3]>,
        out: &mut Vec<Vec<[usize; 3]>>,
    ) {
        out.push(cur.clone());
        for (i, a) in pool.iter().enumerate().skip(start) {
            let deg: usize = a.iter().sum();
            if deg <= budget {
                cur.push(*a);
                tails(budget - deg, i, pool, cur, out);
                cur.pop();
            }
        }
    }

    let mut out = Vec::new();
    for head in multi_indices_up_to(max_degree) {
        let head_deg: usize = head.iter().sum();
        let mut tail_sets = Vec::new();
        tails(max_degree - head_deg, 0, &nonzero, &mut Vec::new(), &mut tail_sets);
        for tail in tail_sets {
            out.push(AlphaIndex::new(head, tail).expect("pool excludes zero indices"));
        }
    }
    out
}

/// All 3-component multi-indices with degree at most `max_degree`, ordered
/// by (degree, lexicographic).
pub(crate) fn multi_indices_up_to(max_degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for a in 0..=d {
            for b in 0..=(d - a) {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}
