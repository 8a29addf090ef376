use super::cloud::{centralize, PointCloud};
use crate::error::{Error, Result};
use nalgebra::{DVector, Vector3};

/// Hard cap on tensor order: `3^4 = 81` keeps brute-force oracles instant.
pub const MAX_TENSOR_ORDER: usize = 4;

/// Kronecker product of two flat tensors (first factor slowest).
pub(crate) fn kron(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let base = i * b.len();
        for (j, &bj) in b.iter().enumerate() {
            out[base + j] = ai * bj;
        }
    }
    out
}

/// `k`-fold Kronecker power of a 3-vector; `k = 0` gives the scalar `[1]`.
pub fn kron_pow(v: &Vector3<f64>, k: usize) -> DVector<f64> {
    let mut out = DVector::from_element(1, 1.0);
    let vd = DVector::from_column_slice(v.as_slice());
    for _ in 0..k {
        out = kron(&out, &vd);
    }
    out
}

/// An order-`k` tensor per point, each stored flat with length `3^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFeature {
    order: usize,
    data: Vec<DVector<f64>>,
}

impl TensorFeature {
    pub fn new(order: usize, data: Vec<DVector<f64>>) -> Result<Self> {
        let dim = 3usize.pow(order as u32);
        if let Some(bad) = data.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "order-{order} tensor needs {dim} entries per point, got {}",
                    bad.len()
                ),
            });
        }
        Ok(TensorFeature { order, data })
    }

    /// The constant feature `1` at every point (order 0).
    pub fn ones(n: usize) -> Self {
        TensorFeature { order: 0, data: vec![DVector::from_element(1, 1.0); n] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn point(&self, j: usize) -> &DVector<f64> {
        &self.data[j]
    }

    pub fn data(&self) -> &[DVector<f64>] {
        &self.data
    }

    /// Applies the `k`-fold Kronecker power of `r` to every point, one mode
    /// at a time.
    pub fn rotate(&self, r: &crate::so3::Rotation) -> TensorFeature {
        let data = self.data.iter().map(|v| apply_kron_rot(r, self.order, v)).collect();
        TensorFeature { order: self.order, data }
    }

    /// Reindexes points: output `j` is input `src[j]`.
    pub fn permute(&self, src: &[usize]) -> TensorFeature {
        assert_eq!(src.len(), self.data.len());
        TensorFeature {
            order: self.order,
            data: src.iter().map(|&s| self.data[s].clone()).collect(),
        }
    }
}

/// Multiplies each tensor mode by the rotation matrix.
pub(crate) fn apply_kron_rot(
    r: &crate::so3::Rotation,
    order: usize,
    v: &DVector<f64>,
) -> DVector<f64> {
    let m = r.matrix();
    let mut cur = v.clone();
    let dim = v.len();
    for mode in 0..order {
        let stride = 3usize.pow((order - 1 - mode) as u32);
        let outer = 3usize.pow(mode as u32);
        let mut next = DVector::zeros(dim);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * stride * 3 + s;
                let x0 = cur[base];
                let x1 = cur[base + stride];
                let x2 = cur[base + 2 * stride];
                next[base] = m[(0, 0)] * x0 + m[(0, 1)] * x1 + m[(0, 2)] * x2;
                next[base + stride] = m[(1, 0)] * x0 + m[(1, 1)] * x1 + m[(1, 2)] * x2;
                next[base + 2 * stride] = m[(2, 0)] * x0 + m[(2, 1)] * x1 + m[(2, 2)] * x2;
            }
        }
        cur = next;
    }
    cur
}

/// Direct sum of tensor features of orders `0 ..= max_order`.
#[derive(Debug, Clone)]
pub struct TensorDirectSum {
    parts: Vec<TensorFeature>,
}

impl TensorDirectSum {
    pub fn new(parts: Vec<TensorFeature>) -> Result<Self> {
        for (k, p) in parts.iter().enumerate() {
            if p.order() != k {
                return Err(Error::DimensionMismatch {
                    detail: format!("part {k} has order {}, expected {k}", p.order()),
                });
            }
        }
        Ok(TensorDirectSum { parts })
    }

    pub fn max_order(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn parts(&self) -> &[TensorFeature] {
        &self.parts
    }
}

/// A composition index `(r_1, ..., r_K)` for the power-sum tensor features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndexR(Vec<usize>);

impl MultiIndexR {
    pub fn new(r: Vec<usize>) -> Self {
        MultiIndexR(r)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn first(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }
}

impl std::fmt::Display for MultiIndexR {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// Power-sum tensor feature in factored form:
/// `Q_j = x_j^{(x) r_1} (x) (sum_i x_i^{(x) r_2}) (x) ... `.
///
/// The inner sums separate, so the factored product equals the literal
/// nested sum over `i_2, ..., i_K` (kept as a reference evaluator in
/// [`crate::reference::q_r_nested`]).
pub fn q_r_oracle(xc: &PointCloud, r: &MultiIndexR) -> Result<TensorFeature> {
    let order = r.total();
    if order > MAX_TENSOR_ORDER {
        return Err(Error::TensorOrderTooLarge { order, max: MAX_TENSOR_ORDER });
    }
    let n = xc.n();
    // Shared tail: product over k >= 2 of the order-r_k power sums.
    let mut tail = DVector::from_element(1, 1.0);
    for &rk in r.entries().iter().skip(1) {
        let mut sum = DVector::zeros(3usize.pow(rk as u32));
        for j in 0..n {
            sum += kron_pow(&xc.point(j), rk);
        }
        tail = kron(&tail, &sum);
    }
    let r1 = r.first();
    let data = (0..n)
        .map(|j| kron(&kron_pow(&xc.point(j), r1), &tail))
        .collect();
    TensorFeature::new(order, data)
}

/// The two-parameter layer
/// `V'_j = theta_1 (x_j (x) V_j) + theta_2 sum_i (x_i (x) V_i)`.
pub fn minimal_layer(
    xc: &PointCloud,
    v: &TensorFeature,
    theta1: f64,
    theta2: f64,
) -> Result<TensorFeature> {
    if v.n() != xc.n() {
        return Err(Error::PointCountMismatch { expected: xc.n(), found: v.n() });
    }
    let order = v.order() + 1;
    if order > MAX_TENSOR_ORDER {
        return Err(Error::TensorOrderTooLarge { order, max: MAX_TENSOR_ORDER });
    }
    let n = xc.n();
    let mut pooled = DVector::zeros(3usize.pow(order as u32));
    if theta2 != 0.0 {
        for i in 0..n {
            pooled += kron(&kron_pow(&xc.point(i), 1), v.point(i));
        }
    }
    let data = (0..n)
        .map(|j| {
            let own = kron(&kron_pow(&xc.point(j), 1), v.point(j));
            own * theta1 + &pooled * theta2
        })
        .collect();
    TensorFeature::new(order, data)
}

/// Centralizes, extends with the constant feature, applies the layers in
/// order, and extracts the feature coordinate.
pub fn compose_minimal(xc: &PointCloud, layers: &[(f64, f64)]) -> Result<TensorFeature> {
    if layers.len() > MAX_TENSOR_ORDER {
        return Err(Error::TensorOrderTooLarge { order: layers.len(), max: MAX_TENSOR_ORDER });
    }
    let xb = centralize(xc);
    let mut v = TensorFeature::ones(xc.n());
    for &(t1, t2) in layers {
        v = minimal_layer(&xb, &v, t1, t2)?;
    }
    Ok(v)
}

/// Layer sequence realizing `Q^(r)` on centralized input, built from the two
/// induction cases: a leading positive `r_1` peels off through
/// `(theta_1, theta_2) = (1, 0)`, a zero `r_1` decrements the first summed
/// entry through `(0, 1)`.
///
/// Requires a canonical index: entries after the first must be positive
/// (zero tail entries only rescale by the point count and are excluded).
pub fn minimal_layers_for(r: &MultiIndexR) -> Result<Vec<(f64, f64)>> {
    if r.entries().iter().skip(1).any(|&rk| rk == 0) {
        return Err(Error::NonCanonicalIndex {
            reason: format!("{r} has a zero entry after the first position"),
        });
    }
    let mut layers = Vec::with_capacity(r.total());
    let mut cur: Vec<usize> = r.entries().to_vec();
    loop {
        let total: usize = cur.iter().sum();
        if total == 0 {
            break;
        }
        if cur[0] > 0 {
            layers.push((1.0, 0.0));
            cur[0] -= 1;
        } else {
            // cur = (0, r2, ...): the decremented r2 moves to the unsummed
            // position, giving the index (r2 - 1, r3, ...).
            layers.push((0.0, 1.0));
            let mut next = cur[1..].to_vec();
            next[0] -= 1;
            cur = next;
        }
    }
    layers.reverse();
    Ok(layers)
}

/// All canonical composition indices with total at most `max_total`:
/// `r_1 >= 0` arbitrary, every later entry positive, in every order.
pub fn canonical_multi_indices(max_total: usize) -> Vec<MultiIndexR> {
    fn tails(budget: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for first in 1..=budget {
            for rest in tails(budget - first) {
                let mut t = vec![first];
                t.extend(rest);
                out.push(t);
            }
        }
        out
    }
    let mut out = Vec::new();
    for r1 in 0..=max_total {
        for tail in tails(max_total - r1) {
            let mut r = vec![r1];
            r.extend(tail);
            out.push(MultiIndexR::new(r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn kron_pow_basics() {
        let e1 = Vector3::new(1.0, 0.0, 0.0);
        let sq = kron_pow(&e1, 2);
        assert_eq!(sq.len(), 9);
        assert_eq!(sq[0], 1.0);
        assert_eq!(sq.iter().filter(|&&v| v != 0.0).count(), 1);

        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(kron_pow(&v, 0).as_slice(), &[1.0]);
        assert_eq!(kron_pow(&v, 1).as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn kron_layout_first_factor_slowest() {
        let a = DVector::from_column_slice(&[1.0, 2.0]);
        let b = DVector::from_column_slice(&[10.0, 20.0, 30.0]);
        let k = kron(&a, &b);
        assert_eq!(k.as_slice(), &[10.0, 20.0, 30.0, 20.0, 40.0, 60.0]);
    }

    fn two_point_cloud() -> PointCloud {
        PointCloud::from_points(&[Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)])
            .unwrap()
    }

    #[test]
    fn q_with_single_unsummed_factor_is_the_cloud_itself() {
        let xc = two_point_cloud();
        let q = q_r_oracle(&xc, &MultiIndexR::new(vec![1])).unwrap();
        assert_eq!(q.point(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(q.point(1).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn q_with_zero_first_entry_is_point_independent() {
        let xc = two_point_cloud();
        let q = q_r_oracle(&xc, &MultiIndexR::new(vec![0, 1])).unwrap();
        for j in 0..2 {
            assert_eq!(q.point(j).as_slice(), &[1.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn q_one_one_on_basis_points() {
        let xc = two_point_cloud();
        let q = q_r_oracle(&xc, &MultiIndexR::new(vec![1, 1])).unwrap();
        // Q_1 = e1 (x) (e1 + e2): ones exactly at flat indices 0 and 1.
        let expect: Vec<f64> = (0..9).map(|i| if i < 2 { 1.0 } else { 0.0 }).collect();
        assert_eq!(q.point(0).as_slice(), expect.as_slice());
    }

    #[test]
    fn q_rejects_excessive_order() {
        let xc = two_point_cloud();
        let err = q_r_oracle(&xc, &MultiIndexR::new(vec![3, 2])).unwrap_err();
        assert!(matches!(err, Error::TensorOrderTooLarge { order: 5, .. }));
    }

    #[test]
    fn minimal_layer_theta_cases() {
        let xc = two_point_cloud();
        let ones = TensorFeature::ones(2);
        let own = minimal_layer(&xc, &ones, 1.0, 0.0).unwrap();
        assert_eq!(own.point(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(own.point(1).as_slice(), &[0.0, 1.0, 0.0]);
        let pooled = minimal_layer(&xc, &ones, 0.0, 1.0).unwrap();
        for j in 0..2 {
            assert_eq!(pooled.point(j).as_slice(), &[1.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn compose_minimal_base_cases() {
        let xc = two_point_cloud();
        let empty = compose_minimal(&xc, &[]).unwrap();
        assert_eq!(empty.order(), 0);
        for j in 0..2 {
            assert_eq!(empty.point(j).as_slice(), &[1.0]);
        }
        let one = compose_minimal(&xc, &[(1.0, 0.0)]).unwrap();
        let xb = centralize(&xc);
        for j in 0..2 {
            assert!((one.point(j) - kron_pow(&xb.point(j), 1)).abs().max() < 1e-15);
        }
    }

    #[test]
    fn layer_sequences_reproduce_power_sum_features() {
        let points: Vec<Vector3<f64>> = vec![
            Vector3::new(0.3, -0.7, 1.1),
            Vector3::new(-1.2, 0.4, 0.2),
            Vector3::new(0.8, 0.9, -0.5),
            Vector3::new(0.05, -0.6, -0.8),
        ];
        let xc = PointCloud::from_points(&points).unwrap();
        let xb = centralize(&xc);
        for r in canonical_multi_indices(3) {
            let layers = minimal_layers_for(&r).unwrap();
            assert_eq!(layers.len(), r.total(), "{r}");
            let got = compose_minimal(&xc, &layers).unwrap();
            let expect = q_r_oracle(&xb, &r).unwrap();
            for j in 0..xc.n() {
                let scale = 1.0 + expect.point(j).abs().max();
                assert!(
                    (got.point(j) - expect.point(j)).abs().max() < 1e-10 * scale,
                    "index {r} point {j}"
                );
            }
        }
    }

    #[test]
    fn non_canonical_indices_are_rejected() {
        assert!(minimal_layers_for(&MultiIndexR::new(vec![1, 0, 2])).is_err());
    }

    /// Direct joint-equivariance form: rotating and relabeling both inputs
    /// rotates (one order higher) and relabels the output.
    #[test]
    fn minimal_layer_is_jointly_equivariant() {
        use crate::so3::sample_rotation;
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::{Distribution, StandardNormal};

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 5;
        for _ in 0..50 {
            let pts: Vec<Vector3<f64>> = (0..n)
                .map(|_| {
                    Vector3::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    )
                })
                .collect();
            let xc = centralize(&PointCloud::from_points(&pts).unwrap());
            let k = 1usize;
            let v = TensorFeature::new(
                k,
                (0..n)
                    .map(|_| {
                        DVector::from_fn(3usize.pow(k as u32), |_, _| {
                            StandardNormal.sample(&mut rng)
                        })
                    })
                    .collect(),
            )
            .unwrap();
            let t1: f64 = StandardNormal.sample(&mut rng);
            let t2: f64 = StandardNormal.sample(&mut rng);
            let r = sample_rotation(&mut rng);
            let mut src: Vec<usize> = (0..n).collect();
            src.shuffle(&mut rng);

            let lhs = minimal_layer(
                &xc.rotate(&r).permute(&src),
                &v.rotate(&r).permute(&src),
                t1,
                t2,
            )
            .unwrap();
            let rhs = minimal_layer(&xc, &v, t1, t2).unwrap().rotate(&r).permute(&src);
            for j in 0..n {
                let scale = 1.0 + rhs.point(j).abs().max();
                assert!(
                    (lhs.point(j) - rhs.point(j)).abs().max() < 1e-10 * scale,
                    "point {j}"
                );
            }
        }
    }

    #[test]
    fn canonical_enumeration_has_expected_count_for_small_totals() {
        // Order matters in the tail: total <= 3 gives 15 indices.
        assert_eq!(canonical_multi_indices(0).len(), 1);
        assert_eq!(canonical_multi_indices(1).len(), 3); // (0),(1),(0,1)
        assert_eq!(canonical_multi_indices(3).len(), 15);
    }
}
