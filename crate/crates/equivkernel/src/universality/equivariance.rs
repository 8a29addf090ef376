//! Black-box equivariance certification and group-averaging projections.

use super::{derive_seed, gaussian_cloud, sample_group_element, OutputRep};
use crate::error::{Error, Result};
use crate::so3::{signature_wigner, IrrepSignature, QuadratureRule};
use crate::tensor::PointCloud;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worst relative residual of `f(g X)` against the output action of `g` on
/// `f(X)`, over random clouds and group elements. Translation acts on the
/// input only; outputs are compared after reindexing points and rotating
/// blocks.
pub fn check_equivariance<F>(
    f: F,
    rep: &OutputRep,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&PointCloud) -> Result<Vec<DVector<f64>>>,
{
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
        let xc = gaussian_cloud(n, &mut rng);
        let g = sample_group_element(n, &mut rng);
        let base = f(&xc)?;
        let moved = f(&g.apply_to_cloud(&xc))?;
        let expect = rep.act(&g, &base);
        let mut num = 0.0;
        let mut den = 0.0;
        for (m, e) in moved.iter().zip(expect.iter()) {
            num += (m - e).norm_squared();
            den += e.norm_squared();
        }
        let residual = num.sqrt() / den.sqrt().max(1e-12);
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Group-averages a function into an equivariant one:
/// `X -> sum_i w_i rho(R_i^{-1}) f(R_i X)`.
///
/// Exactness needs the quadrature band to cover the polynomial degree of
/// `f` plus the band of the output representation; with that, the result
/// passes the rotation part of [`check_equivariance`] at quadrature
/// accuracy, and functions that are already equivariant are fixed points.
pub fn symmetrize<'a, F>(
    f: F,
    quad: &'a QuadratureRule,
    rep: &'a OutputRep,
) -> impl Fn(&PointCloud) -> Result<Vec<DVector<f64>>> + 'a
where
    F: Fn(&PointCloud) -> Result<Vec<DVector<f64>>> + 'a,
{
    move |xc: &PointCloud| {
        let mut acc: Vec<DVector<f64>> = vec![DVector::zeros(rep.dim()); xc.n()];
        for (r, w) in quad.iter() {
            let vals = f(&xc.rotate(r))?;
            let rinv = r.inverse();
            for (a, v) in acc.iter_mut().zip(vals.iter()) {
                *a += rep.rotate(&rinv, v) * w;
            }
        }
        Ok(acc)
    }
}

/// Projects a linear map onto the equivariant maps:
/// `sum_i w_i D_{l2}(R_i^{-1}) A D_{l1}(R_i)`.
///
/// The result has the block structure forced on equivariant maps:
/// cross-degree blocks vanish and matching-degree blocks are scalar
/// multiples of the identity. Requires band limit at least
/// `max(l1) + max(l2)`.
pub fn schur_project(
    l1: &IrrepSignature,
    l2: &IrrepSignature,
    a: &DMatrix<f64>,
    quad: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    Ok(schur_project_many(l1, l2, std::slice::from_ref(a), quad)?.pop().unwrap())
}

/// [`schur_project`] for a batch of maps, sharing the per-node block
/// matrices across the batch.
pub fn schur_project_many(
    l1: &IrrepSignature,
    l2: &IrrepSignature,
    maps: &[DMatrix<f64>],
    quad: &QuadratureRule,
) -> Result<Vec<DMatrix<f64>>> {
    let (rows, cols) = (l2.dim(), l1.dim());
    for a in maps {
        if a.nrows() != rows || a.ncols() != cols {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "map must be {rows} x {cols} for signatures {l2} <- {l1}, got {} x {}",
                    a.nrows(),
                    a.ncols()
                ),
            });
        }
    }
    let mut out = vec![DMatrix::zeros(rows, cols); maps.len()];
    for (r, w) in quad.iter() {
        let d1 = signature_wigner(l1, r);
        let d2_inv = signature_wigner(l2, &r.inverse());
        for (acc, a) in out.iter_mut().zip(maps.iter()) {
            *acc += (&d2_inv * a * &d1) * w;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::haar_quadrature;
    use crate::tensor::centralize;
    use crate::universality::RepBlock;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn centralize_is_exactly_equivariant() {
        let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
        let res = check_equivariance(
            |xc| {
                let c = centralize(xc);
                Ok((0..xc.n())
                    .map(|j| DVector::from_column_slice(c.point(j).as_slice()))
                    .collect())
            },
            &rep,
            5,
            20,
            1234,
        )
        .unwrap();
        assert!(res < 1e-12, "{res}");
    }

    #[test]
    fn broadcasting_one_point_is_detected_as_non_equivariant() {
        let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
        let res = check_equivariance(
            |xc| {
                let p = xc.point(0);
                Ok((0..xc.n())
                    .map(|_| DVector::from_column_slice(p.as_slice()))
                    .collect())
            },
            &rep,
            5,
            20,
            99,
        )
        .unwrap();
        assert!(res > 1e-3, "negative control must fail loudly, got {res}");
    }

    #[test]
    fn symmetrize_fixes_equivariant_functions() {
        let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
        let quad = haar_quadrature(3);
        let f = |xc: &PointCloud| {
            let c = centralize(xc);
            Ok((0..xc.n())
                .map(|j| DVector::from_column_slice(c.point(j).as_slice()))
                .collect())
        };
        let sym = symmetrize(f, &quad, &rep);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xc = gaussian_cloud(4, &mut rng);
        let a = f(&xc).unwrap();
        let b = sym(&xc).unwrap();
        for j in 0..4 {
            assert!((&a[j] - &b[j]).abs().max() < 1e-10);
        }
    }

    #[test]
    fn symmetrized_linear_map_averages_to_trace_over_three() {
        // f(X) = A X symmetrizes to (tr A / 3) X.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = nalgebra::Matrix3::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
        let quad = haar_quadrature(2);
        let f = move |xc: &PointCloud| {
            Ok((0..xc.n())
                .map(|j| DVector::from_column_slice((a * xc.point(j)).as_slice()))
                .collect())
        };
        let sym = symmetrize(f, &quad, &rep);
        let xc = gaussian_cloud(3, &mut rng);
        let got = sym(&xc).unwrap();
        let factor = a.trace() / 3.0;
        for j in 0..3 {
            let expect = xc.point(j) * factor;
            assert!(
                (&got[j] - DVector::from_column_slice(expect.as_slice())).abs().max() < 1e-12
            );
        }
    }

    #[test]
    fn symmetrize_leaves_constants_alone() {
        let rep = OutputRep::scalar();
        let quad = haar_quadrature(1);
        let f = |xc: &PointCloud| Ok(vec![DVector::from_element(1, 4.5); xc.n()]);
        let sym = symmetrize(f, &quad, &rep);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xc = gaussian_cloud(3, &mut rng);
        for v in sym(&xc).unwrap() {
            assert!((v[0] - 4.5).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetrize_is_idempotent_on_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = nalgebra::Matrix3::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
        let quad = haar_quadrature(2);
        let f = move |xc: &PointCloud| {
            Ok((0..xc.n())
                .map(|j| DVector::from_column_slice((a * xc.point(j)).as_slice()))
                .collect())
        };
        let once = symmetrize(f, &quad, &rep);
        let twice = symmetrize(&once, &quad, &rep);
        let xc = gaussian_cloud(4, &mut rng);
        let u = once(&xc).unwrap();
        let v = twice(&xc).unwrap();
        for j in 0..4 {
            assert!((&u[j] - &v[j]).abs().max() < 1e-11);
        }
    }

    #[test]
    fn projection_annihilates_cross_degree_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let quad = haar_quadrature(3);
        let l1 = IrrepSignature::new(vec![1]);
        let l2 = IrrepSignature::new(vec![2]);
        let a = DMatrix::from_fn(5, 3, |_, _| StandardNormal.sample(&mut rng));
        let p = schur_project(&l1, &l2, &a, &quad).unwrap();
        assert!(p.abs().max() < 1e-10, "{}", p.abs().max());
    }

    #[test]
    fn projection_of_matching_degree_is_trace_over_dim_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let quad = haar_quadrature(2);
        let sig = IrrepSignature::new(vec![1]);
        let a = DMatrix::from_fn(3, 3, |_, _| StandardNormal.sample(&mut rng));
        let p = schur_project(&sig, &sig, &a, &quad).unwrap();
        let expect = DMatrix::identity(3, 3) * (a.trace() / 3.0);
        assert!((p - expect).abs().max() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let quad = haar_quadrature(4);
        let l1 = IrrepSignature::new(vec![0, 1, 1]);
        let l2 = IrrepSignature::new(vec![1, 2]);
        let a = DMatrix::from_fn(l2.dim(), l1.dim(), |_, _| StandardNormal.sample(&mut rng));
        let p1 = schur_project(&l1, &l2, &a, &quad).unwrap();
        let p2 = schur_project(&l1, &l2, &p1, &quad).unwrap();
        assert!((&p1 - p2).abs().max() < 1e-11);
    }

    #[test]
    fn projected_space_dimension_counts_matching_pairs() {
        let quad = haar_quadrature(2);
        let l1 = IrrepSignature::new(vec![0, 1, 1]);
        let l2 = IrrepSignature::new(vec![1]);
        // Project every basis matrix and count the rank of the span.
        let (rows, cols) = (l2.dim(), l1.dim());
        let mut stacked = DMatrix::zeros(rows * cols, rows * cols);
        let mut basis = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let mut e = DMatrix::zeros(rows, cols);
                e[(i, j)] = 1.0;
                basis.push(e);
            }
        }
        let projected = schur_project_many(&l1, &l2, &basis, &quad).unwrap();
        for (k, p) in projected.iter().enumerate() {
            for (idx, v) in p.iter().enumerate() {
                stacked[(k, idx)] = *v;
            }
        }
        let svd = stacked.svd(false, false);
        let smax = svd.singular_values[0];
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
        assert_eq!(rank, 2);
    }
}
