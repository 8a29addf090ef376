//! Radially-weighted harmonic filters.
//!
//! A filter of maximum degree `D` carries one radial polynomial per degree;
//! component `l` evaluates to `R_l(|x|) Y^l(x / |x|)`, with the unit vector
//! taken as zero at the origin. In polynomial coordinates that means a
//! radial term `t^s` is a polynomial filter only when `s >= l` and `s - l`
//! is even; other terms are legal but flagged, since they leave the
//! polynomial family.

use crate::error::{Error, Result};
use crate::so3::{real_sph_harm_all, IrrepSignature, IrrepVector};
use nalgebra::{DVector, Vector3};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    max_degree: usize,
    radial: Vec<Vec<f64>>,
}

impl FilterSpec {
    /// `radial[l]` holds the coefficients of `R_l` in `|x|`, constant term
    /// first, each of degree at most `max_degree`.
    pub fn new(max_degree: usize, radial: Vec<Vec<f64>>) -> Result<Self> {
        if radial.len() != max_degree + 1 {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "filter of max degree {max_degree} needs {} radial polynomials, got {}",
                    max_degree + 1,
                    radial.len()
                ),
            });
        }
        for (l, coeffs) in radial.iter().enumerate() {
            if coeffs.len() > max_degree + 1 {
                return Err(Error::DegreeTooLarge {
                    degree: coeffs.len() - 1,
                    max: max_degree,
                });
            }
            let _ = l;
        }
        let spec = FilterSpec { max_degree, radial };
        for (l, s) in spec.parity_warnings() {
            log::warn!(
                "filter radial term t^{s} at degree {l} is not polynomial in x \
                 (needs s >= l and s - l even)"
            );
        }
        Ok(spec)
    }

    /// All-zero filter (useful as the skip-only layer).
    pub fn zero(max_degree: usize) -> FilterSpec {
        FilterSpec { max_degree, radial: vec![Vec::new(); max_degree + 1] }
    }

    /// `R_0 = 1`, everything else zero: sums features across points.
    pub fn averaging(max_degree: usize) -> FilterSpec {
        let mut radial = vec![Vec::new(); max_degree + 1];
        radial[0] = vec![1.0];
        FilterSpec { max_degree, radial }
    }

    /// `R_1(t) = t`, everything else zero: the degree-1 component is `x`
    /// itself.
    pub fn position(max_degree: usize) -> FilterSpec {
        assert!(max_degree >= 1);
        let mut radial = vec![Vec::new(); max_degree + 1];
        radial[1] = vec![0.0, 1.0];
        FilterSpec { max_degree, radial }
    }

    /// `R_l(t) = t^s` on every degree `l <= s` of matching parity: all
    /// components are `s`-homogeneous polynomials, and together they span
    /// the same space as the entries of `x^{(x) s}`.
    pub fn homogeneous(s: usize, max_degree: usize) -> FilterSpec {
        assert!(s <= max_degree);
        let mut radial = vec![Vec::new(); max_degree + 1];
        let mut mono = vec![0.0; s + 1];
        mono[s] = 1.0;
        let mut l = s;
        loop {
            radial[l] = mono.clone();
            if l < 2 {
                break;
            }
            l -= 2;
        }
        FilterSpec { max_degree, radial }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn radial(&self) -> &[Vec<f64>] {
        &self.radial
    }

    pub fn signature(&self) -> IrrepSignature {
        IrrepSignature::range(self.max_degree)
    }

    /// `(degree, power)` pairs whose radial term breaks polynomial parity.
    pub fn parity_warnings(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (l, coeffs) in self.radial.iter().enumerate() {
            for (s, &c) in coeffs.iter().enumerate() {
                if c != 0.0 && (s < l || (s - l) % 2 != 0) {
                    out.push((l, s));
                }
            }
        }
        out
    }

    fn radial_value(&self, l: usize, t: f64) -> f64 {
        self.radial[l].iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Evaluates the filter at a displacement. Component `l` is
    /// `R_l(|x|) Y^l(xhat)`; at the origin `xhat = 0`, so every block with
    /// `l >= 1` vanishes and block 0 carries `R_0(0)`.
    pub fn eval(&self, x: &Vector3<f64>) -> IrrepVector {
        let t = x.norm();
        let xhat = if t > 0.0 { x / t } else { Vector3::zeros() };
        let harmonics = real_sph_harm_all(self.max_degree, &xhat);
        let sig = self.signature();
        let mut data = DVector::zeros(sig.dim());
        for l in 0..=self.max_degree {
            let r = self.radial_value(l, t);
            if r == 0.0 {
                continue;
            }
            let off = sig.block_offset(l);
            for (m, &y) in harmonics[l].iter().enumerate() {
                data[off + m] = r * y;
            }
        }
        IrrepVector::new(sig, data).expect("shape by construction")
    }
}

/// Free-function form of [`FilterSpec::eval`].
pub fn filter_eval(f: &FilterSpec, x: &Vector3<f64>) -> IrrepVector {
    f.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron_pow;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn averaging_filter_is_constant_one() {
        let f = FilterSpec::averaging(2);
        for x in [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 2.0, -0.5),
            Vector3::new(-3.0, 0.0, 0.1),
        ] {
            let v = f.eval(&x);
            assert_eq!(v.data()[0], 1.0);
            assert!(v.data().rows(1, v.data().len() - 1).abs().max() == 0.0);
        }
    }

    #[test]
    fn position_filter_returns_the_displacement() {
        let f = FilterSpec::position(1);
        let x = Vector3::new(0.3, -1.2, 2.2);
        let v = f.eval(&x);
        assert_eq!(v.data()[0], 0.0);
        for i in 0..3 {
            assert!((v.data()[1 + i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn origin_convention() {
        // t^l radial terms vanish at 0 for l >= 1; only R_0(0) survives.
        let f = FilterSpec::averaging(3);
        let v = f.eval(&Vector3::zeros());
        assert_eq!(v.data()[0], 1.0);
        assert!(v.data().rows(1, v.data().len() - 1).abs().max() == 0.0);

        let g = FilterSpec::homogeneous(2, 2);
        let v = g.eval(&Vector3::zeros());
        assert!(v.data().abs().max() == 0.0);
    }

    #[test]
    fn parity_warnings_flag_non_polynomial_terms() {
        // R_1 = 1 (power 0 < degree 1) and R_0 = t (odd gap) both flagged.
        let f = FilterSpec::new(1, vec![vec![0.0, 1.0], vec![1.0]]).unwrap();
        let warns = f.parity_warnings();
        assert!(warns.contains(&(1, 0)));
        assert!(warns.contains(&(0, 1)));
        assert!(FilterSpec::homogeneous(3, 3).parity_warnings().is_empty());
        assert!(FilterSpec::position(2).parity_warnings().is_empty());
    }

    /// The homogeneous filter of order `s` spans exactly the entries of the
    /// `s`-th Kronecker power, checked by ranks on sampled generic points.
    #[test]
    fn homogeneous_filter_spans_the_tensor_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for s in 0..=3usize {
            let f = FilterSpec::homogeneous(s, 3);
            let n = 2 * 3usize.pow(s as u32) + 8;
            let fdim = f.signature().dim();
            let tdim = 3usize.pow(s as u32);
            let mut mf = DMatrix::zeros(n, fdim);
            let mut mt = DMatrix::zeros(n, tdim);
            for i in 0..n {
                let x = Vector3::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                mf.row_mut(i).copy_from_slice(f.eval(&x).data().as_slice());
                mt.row_mut(i).copy_from_slice(kron_pow(&x, s).as_slice());
            }
            let expected = (s + 1) * (s + 2) / 2;
            assert_eq!(rank(&mf), expected, "filter rank at s={s}");
            assert_eq!(rank(&mt), expected, "tensor rank at s={s}");
            let joined = DMatrix::from_fn(n, fdim + tdim, |i, j| {
                if j < fdim {
                    mf[(i, j)]
                } else {
                    mt[(i, j - fdim)]
                }
            });
            assert_eq!(rank(&joined), expected, "span equality at s={s}");
        }
    }

    fn rank(m: &DMatrix<f64>) -> usize {
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values[0];
        svd.singular_values.iter().filter(|&&x| x > 1e-10 * smax).count()
    }
}
