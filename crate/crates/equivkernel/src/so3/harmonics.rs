//! Real solid harmonics.
//!
//! The degree-`l` block consists of `2l + 1` homogeneous harmonic polynomials
//! generated by a single recursion (see `conventions.md`). The recursion is
//! written once, generically over the scalar type, and instantiated with
//! plain `f64` for values and with a small forward-mode dual number for exact
//! gradients — the gradients feed the Lie-algebra generator matrices used by
//! the Clebsch-Gordan solver.

use nalgebra::{DVector, Vector3};

/// Minimal scalar interface the recursion needs.
pub(crate) trait HarmonicScalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl HarmonicScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// Forward-mode dual: value plus gradient with respect to `(x, y, z)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dual3 {
    pub v: f64,
    pub g: [f64; 3],
}

impl Dual3 {
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Dual3 { v, g }
    }
}

impl HarmonicScalar for Dual3 {
    fn zero() -> Self {
        Dual3 { v: 0.0, g: [0.0; 3] }
    }
    fn one() -> Self {
        Dual3 { v: 1.0, g: [0.0; 3] }
    }
    fn add(&self, other: &Self) -> Self {
        Dual3 {
            v: self.v + other.v,
            g: [self.g[0] + other.g[0], self.g[1] + other.g[1], self.g[2] + other.g[2]],
        }
    }
    fn sub(&self, other: &Self) -> Self {
        Dual3 {
            v: self.v - other.v,
            g: [self.g[0] - other.g[0], self.g[1] - other.g[1], self.g[2] - other.g[2]],
        }
    }
    fn mul(&self, other: &Self) -> Self {
        Dual3 {
            v: self.v * other.v,
            g: [
                self.v * other.g[0] + self.g[0] * other.v,
                self.v * other.g[1] + self.g[1] * other.v,
                self.v * other.g[2] + self.g[2] * other.v,
            ],
        }
    }
    fn scale(&self, c: f64) -> Self {
        Dual3 { v: self.v * c, g: [self.g[0] * c, self.g[1] * c, self.g[2] * c] }
    }
}

/// Runs the recursion up to `ell_max`. `table[l]` holds the degree-`l` block
/// in internal order `m = -l ... +l`; [`reorder_block`] applies the public
/// component order.
pub(crate) fn solid_harmonics_table<T: HarmonicScalar>(ell_max: usize, xyz: &[T; 3]) -> Vec<Vec<T>> {
    let mut table: Vec<Vec<T>> = Vec::with_capacity(ell_max + 1);
    table.push(vec![T::one()]);
    if ell_max == 0 {
        return table;
    }
    let (x, y, z) = (xyz[0].clone(), xyz[1].clone(), xyz[2].clone());
    table.push(vec![y.clone(), z.clone(), x.clone()]);
    let r2 = x.mul(&x).add(&y.mul(&y)).add(&z.mul(&z));
    for l in 1..ell_max {
        let lf = l as f64;
        let prev = &table[l];
        let prev2 = &table[l - 1];
        let mut next = vec![T::zero(); 2 * l + 3];
        let edge = ((2.0 * lf + 1.0) / (2.0 * lf + 2.0)).sqrt();
        let s_top = &prev[2 * l]; // m = +l
        let s_bot = &prev[0]; // m = -l
        next[2 * l + 2] = x.mul(s_top).sub(&y.mul(s_bot)).scale(edge);
        next[0] = y.mul(s_top).add(&x.mul(s_bot)).scale(edge);
        for m in -(l as i64)..=(l as i64) {
            let idx = (m + l as i64) as usize;
            let num = (lf + m as f64) * (lf - m as f64);
            let mut t = z.mul(&prev[idx]).scale(2.0 * lf + 1.0);
            if num > 0.0 {
                let idx2 = (m + l as i64 - 1) as usize;
                t = t.sub(&r2.mul(&prev2[idx2]).scale(num.sqrt()));
            }
            let denom = ((lf + 1.0 + m as f64) * (lf + 1.0 - m as f64)).sqrt();
            next[(m + l as i64 + 1) as usize] = t.scale(1.0 / denom);
        }
        table.push(next);
    }
    table
}

/// Applies the public component ordering: degree 1 is returned as
/// `(x, y, z)` (internal `m` order is `(y, z, x)`); every other degree keeps
/// ascending `m`.
pub(crate) fn reorder_block<T: Clone>(l: usize, block: &[T]) -> Vec<T> {
    if l == 1 {
        vec![block[2].clone(), block[0].clone(), block[1].clone()]
    } else {
        block.to_vec()
    }
}

/// Degree-`l` real solid harmonics at `x`, in the pinned component order.
///
/// The entries are homogeneous degree-`l` polynomials; `Y^0 = [1]` and
/// `Y^1(x) = (x, y, z)`. At the origin every block with `l >= 1` vanishes.
pub fn real_sph_harm(ell: usize, x: &Vector3<f64>) -> DVector<f64> {
    real_sph_harm_all(ell, x).pop().expect("table is never empty")
}

/// All degree blocks `0 ..= ell_max` at once (shares one recursion pass).
pub fn real_sph_harm_all(ell_max: usize, x: &Vector3<f64>) -> Vec<DVector<f64>> {
    let table = solid_harmonics_table(ell_max, &[x.x, x.y, x.z]);
    table
        .iter()
        .enumerate()
        .map(|(l, block)| DVector::from_vec(reorder_block(l, block)))
        .collect()
}

/// Values and exact gradients of every component, degrees `0 ..= ell_max`,
/// in the public component order.
pub(crate) fn real_sph_harm_with_grad(ell_max: usize, x: &Vector3<f64>) -> Vec<Vec<Dual3>> {
    let coords =
        [Dual3::variable(x.x, 0), Dual3::variable(x.y, 1), Dual3::variable(x.z, 2)];
    let table = solid_harmonics_table(ell_max, &coords);
    table.iter().enumerate().map(|(l, block)| reorder_block(l, block)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn degree_zero_is_the_constant_one() {
        let y = real_sph_harm(0, &Vector3::new(3.0, -2.0, 0.5));
        assert_eq!(y.len(), 1);
        assert_eq!(y[0], 1.0);
        let y0 = real_sph_harm(0, &Vector3::zeros());
        assert_eq!(y0[0], 1.0);
    }

    #[test]
    fn degree_one_is_the_identity_map() {
        let x = Vector3::new(0.0, 0.0, 1.0);
        let y = real_sph_harm(1, &x);
        assert_eq!(y.as_slice(), &[0.0, 0.0, 1.0]);
        let x = Vector3::new(0.7, -1.3, 2.4);
        let y = real_sph_harm(1, &x);
        for i in 0..3 {
            assert!((y[i] - x[i]).abs() < 1e-15);
        }
    }

    /// Independent oracle: the classical degree-2 formulas, hand-written.
    fn degree_two_reference(x: f64, y: f64, z: f64) -> [f64; 5] {
        let s3 = 3.0f64.sqrt();
        [
            s3 * x * y,
            s3 * y * z,
            (3.0 * z * z - (x * x + y * y + z * z)) / 2.0,
            s3 * z * x,
            s3 / 2.0 * (x * x - y * y),
        ]
    }

    #[test]
    fn degree_two_matches_the_classical_basis() {
        for (x, y, z) in [(1.0, 0.0, 0.0), (0.3, -0.8, 1.7), (-2.0, 0.5, 0.25)] {
            let got = real_sph_harm(2, &Vector3::new(x, y, z));
            let expect = degree_two_reference(x, y, z);
            for i in 0..5 {
                assert!(
                    (got[i] - expect[i]).abs() < 1e-14,
                    "component {i} at ({x},{y},{z}): {} vs {}",
                    got[i],
                    expect[i]
                );
            }
        }
        // The spec-level spot value: the five degree-2 harmonics at e1.
        let at_e1 = real_sph_harm(2, &Vector3::new(1.0, 0.0, 0.0));
        let expect = [0.0, 0.0, -0.5, 0.0, 3.0f64.sqrt() / 2.0];
        for i in 0..5 {
            assert!((at_e1[i] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn origin_evaluates_to_zero_for_positive_degree() {
        for l in 1..=4 {
            let y = real_sph_harm(l, &Vector3::zeros());
            assert!(y.iter().all(|&v| v == 0.0), "degree {l}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = Vector3::new(0.4, -0.9, 1.2);
        let blocks = real_sph_harm_with_grad(3, &x);
        let h = 1e-6;
        for (l, block) in blocks.iter().enumerate() {
            for (c, dual) in block.iter().enumerate() {
                for axis in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[axis] += h;
                    xm[axis] -= h;
                    let fd = (real_sph_harm(l, &xp)[c] - real_sph_harm(l, &xm)[c]) / (2.0 * h);
                    assert!(
                        (dual.g[axis] - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                        "l={l} c={c} axis={axis}: {} vs {}",
                        dual.g[axis],
                        fd
                    );
                }
            }
        }
    }
}
