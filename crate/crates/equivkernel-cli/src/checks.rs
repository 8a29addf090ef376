//! The check registry: every module invariant as a named, seeded,
//! tolerance-gated check.
//!
//! A check returns one residual; `Below` checks pass under their tolerance,
//! `Above` checks are falsifiability controls that must fail loudly. All
//! randomness derives from the configured master seed, so identical
//! configurations produce identical reports (wall-time fields aside).

use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{CheckRecord, Report};
use equivkernel::irrep::{
    compose_tfn, ConvLayer, FeatureField, FilterSpec, NetworkChannel, NetworkSpec,
    SelfInteraction,
};
use equivkernel::reference;
use equivkernel::so3::{
    cg_decompose, cg_output_signature, haar_quadrature, real_sph_harm,
    sample_rotation, signature_wigner, wigner_d, IrrepSignature, IrrepVector,
};
use equivkernel::tensor::{
    canonical_multi_indices, centralize, compose_minimal, invariant_functionals, kron_pow,
    minimal_layer, minimal_layers_for, q_r_oracle, PointCloud, TensorFeature,
};
use equivkernel::universality::{
    check_equivariance, derive_seed, families, gaussian_cloud, sample_group_element,
    schur_project_many, symmetrize, verify_d_spanning, OutputRep, RepBlock,
};
use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Below,
    Above,
}

struct CheckDef {
    name: &'static str,
    anchor: &'static str,
    suite: Suite,
    tolerance: f64,
    direction: Direction,
    run: fn(&SuiteConfig) -> equivkernel::Result<f64>,
}

fn rng_for(cfg: &SuiteConfig, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, tag))
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    )
}

// --- rotation-group checks --------------------------------------------------

fn wigner_homomorphism(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 1);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(20) {
        let r1 = sample_rotation(&mut rng);
        let r2 = sample_rotation(&mut rng);
        for ell in 0..=4usize {
            let lhs = wigner_d(ell, &r1.compose(&r2));
            let rhs = wigner_d(ell, &r1) * wigner_d(ell, &r2);
            worst = worst.max((lhs - rhs).abs().max());
        }
    }
    Ok(worst)
}

fn wigner_orthogonality(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 2);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(20) {
        let r = sample_rotation(&mut rng);
        for ell in 0..=4usize {
            let d = wigner_d(ell, &r);
            let dim = 2 * ell + 1;
            worst = worst.max((&d * d.transpose() - DMatrix::identity(dim, dim)).abs().max());
        }
    }
    Ok(worst)
}

fn harmonic_covariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 3);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(20) {
        let r = sample_rotation(&mut rng);
        let x = random_vector(&mut rng);
        for ell in 0..=4usize {
            let lhs = real_sph_harm(ell, &r.apply(&x));
            let rhs = wigner_d(ell, &r) * real_sph_harm(ell, &x);
            let scale = 1.0 + x.norm().powi(ell as i32);
            worst = worst.max((lhs - rhs).abs().max() / scale);
        }
    }
    Ok(worst)
}

fn harmonic_homogeneity(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 4);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(20) {
        let x = random_vector(&mut rng);
        let c: f64 = 0.2 + 3.0 * rand::Rng::random::<f64>(&mut rng);
        for ell in 0..=4usize {
            let direct = real_sph_harm(ell, &(x * c));
            let scaled = real_sph_harm(ell, &x) * c.powi(ell as i32);
            let scale = 1.0 + scaled.abs().max();
            worst = worst.max((direct - scaled).abs().max() / scale);
        }
    }
    Ok(worst)
}

fn degree_one_identities(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 5);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(50) {
        let r = sample_rotation(&mut rng);
        let d = wigner_d(1, &r);
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((d[(i, j)] - r.matrix()[(i, j)]).abs());
            }
        }
        let x = random_vector(&mut rng);
        let y = real_sph_harm(1, &x);
        for i in 0..3 {
            worst = worst.max((y[i] - x[i]).abs());
        }
    }
    Ok(worst)
}

fn quadrature_normalization(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut worst = 0.0f64;
    for band in 0..=4 {
        let q = haar_quadrature(band);
        worst = worst.max((q.weights().iter().sum::<f64>() - 1.0).abs());
    }
    Ok(worst)
}

fn quadrature_block_average(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let q = haar_quadrature(4);
    let mut worst = 0.0f64;
    for ell in 1..=4usize {
        let dim = 2 * ell + 1;
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        for (r, w) in q.iter() {
            acc += wigner_d(ell, r) * w;
        }
        worst = worst.max(acc.abs().max());
    }
    Ok(worst)
}

fn quadrature_schur(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let band = 4;
    let q = haar_quadrature(band);
    let mut worst = 0.0f64;
    for l1 in 0..=band / 2 {
        for l2 in 0..=band / 2 {
            let (d1, d2) = (2 * l1 + 1, 2 * l2 + 1);
            let mut acc = vec![0.0; d1 * d1 * d2 * d2];
            for (r, w) in q.iter() {
                let m1 = wigner_d(l1, r);
                let m2 = wigner_d(l2, r);
                let mut idx = 0;
                for i in 0..d1 {
                    for j in 0..d1 {
                        for k in 0..d2 {
                            for l in 0..d2 {
                                acc[idx] += w * m1[(i, j)] * m2[(k, l)];
                                idx += 1;
                            }
                        }
                    }
                }
            }
            let mut idx = 0;
            for i in 0..d1 {
                for j in 0..d1 {
                    for k in 0..d2 {
                        for l in 0..d2 {
                            let expect = if l1 == l2 && i == k && j == l {
                                1.0 / d1 as f64
                            } else {
                                0.0
                            };
                            worst = worst.max((acc[idx] - expect).abs());
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn haar_sample_mean(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 6);
    let mut acc = nalgebra::Matrix3::<f64>::zeros();
    let n = 10_000;
    for _ in 0..n {
        acc += sample_rotation(&mut rng).matrix();
    }
    Ok((acc / n as f64).abs().max())
}

fn cg_orthogonality(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut worst = 0.0f64;
    for l1 in 0..=3usize {
        for l2 in 0..=3usize {
            let it = cg_decompose(
                &IrrepSignature::new(vec![l1]),
                &IrrepSignature::new(vec![l2]),
            )?;
            let u = it.dense();
            let dim = u.nrows();
            worst = worst
                .max((&u * u.transpose() - DMatrix::identity(dim, dim)).abs().max())
                .max((u.transpose() * &u - DMatrix::identity(dim, dim)).abs().max());
        }
    }
    Ok(worst)
}

fn cg_intertwining(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 7);
    let mut worst = 0.0f64;
    for l1 in 0..=3usize {
        for l2 in 0..=3usize {
            let sf = IrrepSignature::new(vec![l1]);
            let si = IrrepSignature::new(vec![l2]);
            let it = cg_decompose(&sf, &si)?;
            let u = it.dense();
            for _ in 0..cfg.trials.min(20) {
                let r = sample_rotation(&mut rng);
                let m = signature_wigner(&sf, &r).kronecker(&signature_wigner(&si, &r));
                let dout = signature_wigner(it.lout(), &r);
                worst = worst.max((&u * m - dout * &u).abs().max());
            }
        }
    }
    Ok(worst)
}

fn cg_multiplicity(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 8);
    let mut mismatches = 0usize;
    for l1 in 0..=2usize {
        for l2 in 0..=2usize {
            for l_out in 0..=(l1 + l2 + 1) {
                let expect = usize::from((l1.abs_diff(l2)..=(l1 + l2)).contains(&l_out));
                let s1 = IrrepSignature::new(vec![l1]);
                let s2 = IrrepSignature::new(vec![l2]);
                let so = IrrepSignature::new(vec![l_out]);
                let d = s1.dim() * s2.dim();
                let dl = so.dim();
                let mut stacked = DMatrix::<f64>::zeros(2 * dl * d, dl * d);
                for k in 0..2 {
                    let r = sample_rotation(&mut rng);
                    let m = signature_wigner(&s1, &r).kronecker(&signature_wigner(&s2, &r));
                    let dout = signature_wigner(&so, &r);
                    let block = m.transpose().kronecker(&DMatrix::identity(dl, dl))
                        - DMatrix::identity(d, d).kronecker(&dout);
                    stacked.rows_mut(k * dl * d, dl * d).copy_from(&block);
                }
                let svd = stacked.svd(false, false);
                let smax = svd.singular_values[0].max(1.0);
                let nulls =
                    svd.singular_values.iter().filter(|&&s| s < 1e-7 * smax).count();
                if nulls != expect {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(mismatches as f64)
}

// --- tensor checks ----------------------------------------------------------

fn centralize_projection(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 10);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let xc = gaussian_cloud(cfg.points, &mut rng);
        let c = centralize(&xc);
        worst = worst.max(c.mean().norm());
        let c2 = centralize(&c);
        worst = worst.max((c.matrix() - c2.matrix()).abs().max());
        let t = random_vector(&mut rng);
        let shifted = centralize(&xc.translate(&t));
        worst = worst.max((c.matrix() - shifted.matrix()).abs().max());
    }
    Ok(worst)
}

fn minimal_layer_equivariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 11);
    let mut worst = 0.0f64;
    let n = cfg.points;
    for _ in 0..50 {
        let order = 1usize;
        let xc = centralize(&gaussian_cloud(n, &mut rng));
        let v = TensorFeature::new(
            order,
            (0..n)
                .map(|_| DVector::from_fn(3usize.pow(order as u32), |_, _| {
                    StandardNormal.sample(&mut rng)
                }))
                .collect(),
        )?;
        let t1: f64 = StandardNormal.sample(&mut rng);
        let t2: f64 = StandardNormal.sample(&mut rng);
        let g = sample_group_element(n, &mut rng);
        // Centralized input: the translation part drops on its own.
        let xg = xc.rotate(&g.r).permute(&g.src);
        let vg = v.rotate(&g.r).permute(&g.src);
        let lhs = minimal_layer(&xg, &vg, t1, t2)?;
        let rhs = minimal_layer(&xc, &v, t1, t2)?.rotate(&g.r).permute(&g.src);
        for j in 0..n {
            let scale = 1.0 + rhs.point(j).abs().max();
            worst = worst.max((lhs.point(j) - rhs.point(j)).abs().max() / scale);
        }
    }
    Ok(worst)
}

fn power_sum_factored_vs_nested(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 12);
    let mut worst = 0.0f64;
    for n in [2usize, 4, 5] {
        let xc = gaussian_cloud(n, &mut rng);
        for r in canonical_multi_indices(3) {
            if r.entries().len() > 3 {
                continue;
            }
            let fast = q_r_oracle(&xc, &r)?;
            let slow = reference::q_r_nested(&xc, &r)?;
            for j in 0..n {
                let scale = 1.0 + slow.point(j).abs().max();
                worst = worst.max((fast.point(j) - slow.point(j)).abs().max() / scale);
            }
        }
    }
    Ok(worst)
}

fn minimal_chain_realization(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 13);
    let mut worst = 0.0f64;
    let xc = gaussian_cloud(cfg.points, &mut rng);
    let xb = centralize(&xc);
    for r in canonical_multi_indices(3) {
        let layers = minimal_layers_for(&r)?;
        let got = compose_minimal(&xc, &layers)?;
        let expect = q_r_oracle(&xb, &r)?;
        for j in 0..xc.n() {
            let scale = 1.0 + expect.point(j).abs().max();
            worst = worst.max((got.point(j) - expect.point(j)).abs().max() / scale);
        }
    }
    Ok(worst)
}

fn pool_invariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 14);
    let mut worst = 0.0f64;
    for degree in [0usize, 2, 3, 4] {
        for lam in invariant_functionals(degree)? {
            let xc = gaussian_cloud(cfg.points, &mut rng);
            let t = TensorFeature::new(
                degree,
                xc.points().map(|p| kron_pow(&p, degree)).collect(),
            )?;
            let r = sample_rotation(&mut rng);
            let a = equivkernel::tensor::apply_pool(&lam, &t)?;
            let b = equivkernel::tensor::apply_pool(&lam, &t.rotate(&r))?;
            for j in 0..xc.n() {
                worst = worst.max((a[j] - b[j]).abs() / (1.0 + a[j].abs()));
            }
        }
    }
    Ok(worst)
}

fn pool_rank_counts(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let quad = haar_quadrature(4);
    let mut mismatches = 0usize;
    for degree in [0usize, 2, 3, 4] {
        let fs = invariant_functionals(degree)?;
        let dim = 3usize.pow(degree as u32);
        let mut m = DMatrix::zeros(fs.len(), dim);
        for (i, f) in fs.iter().enumerate() {
            m.row_mut(i).copy_from_slice(f.coeffs().as_slice());
        }
        let svd = m.svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = if smax == 0.0 {
            0
        } else {
            svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count()
        };
        if rank != reference::invariant_subspace_dim(degree, &quad) {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64)
}

// --- layer checks -------------------------------------------------------

fn sample_chain() -> Vec<ConvLayer> {
    vec![
        ConvLayer::standard(FilterSpec::homogeneous(2, 2), 0.4),
        ConvLayer::standard(FilterSpec::homogeneous(1, 1), -0.9),
    ]
}

fn alt_sample_chain() -> Vec<ConvLayer> {
    vec![
        ConvLayer::alternative(FilterSpec::position(1), -1.0, 0.3),
        ConvLayer::alternative(FilterSpec::homogeneous(2, 2), 0.5, 0.8),
    ]
}

fn run_chain(chain: &[ConvLayer], xc: &PointCloud) -> equivkernel::Result<Vec<DVector<f64>>> {
    let mut field = FeatureField::ext(xc);
    for conv in chain {
        field = conv.apply(&field)?;
    }
    Ok(field.values().to_vec())
}

fn chain_signature(chain: &[ConvLayer]) -> IrrepSignature {
    let mut sig = IrrepSignature::new(vec![0]);
    for conv in chain {
        sig = cg_output_signature(&conv.filter.signature(), &sig);
    }
    sig
}

fn conv_translation_invariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 20);
    let mut worst = 0.0f64;
    for chain in [sample_chain(), alt_sample_chain()] {
        for _ in 0..cfg.trials.min(10) {
            let xc = gaussian_cloud(cfg.points, &mut rng);
            let t = random_vector(&mut rng);
            let a = run_chain(&chain, &xc)?;
            let b = run_chain(&chain, &xc.translate(&t))?;
            for j in 0..cfg.points {
                let scale = 1.0 + a[j].abs().max();
                worst = worst.max((&a[j] - &b[j]).abs().max() / scale);
            }
        }
    }
    Ok(worst)
}

fn conv_permutation_equivariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 21);
    let mut worst = 0.0f64;
    for chain in [sample_chain(), alt_sample_chain()] {
        for _ in 0..cfg.trials.min(10) {
            let xc = gaussian_cloud(cfg.points, &mut rng);
            let g = sample_group_element(cfg.points, &mut rng);
            let a = run_chain(&chain, &xc)?;
            let b = run_chain(&chain, &xc.permute(&g.src))?;
            for j in 0..cfg.points {
                // Bitwise: summation order is label-independent.
                worst = worst.max(
                    (&b[j] - &a[g.src[j]]).abs().max(),
                );
            }
        }
    }
    Ok(worst)
}

fn conv_rotation_equivariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut worst = 0.0f64;
    for chain in [sample_chain(), alt_sample_chain()] {
        let sig = chain_signature(&chain);
        let res = check_equivariance(
            move |xc: &PointCloud| run_chain(&chain, xc),
            &OutputRep::irreps(&sig),
            cfg.points,
            cfg.trials.min(20),
            derive_seed(cfg.seed, 22),
        )?;
        worst = worst.max(res);
    }
    Ok(worst)
}

fn self_interaction_equivariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 23);
    let l_in = IrrepSignature::new(vec![0, 1, 1, 2]);
    let l_out = IrrepSignature::new(vec![1, 2]);
    let si = SelfInteraction::new(
        l_in.clone(),
        l_out,
        &[(1, 0, 0.3), (2, 0, -1.7), (3, 1, 0.9)],
    )?;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let v = IrrepVector::new(
            l_in.clone(),
            DVector::from_fn(l_in.dim(), |_, _| StandardNormal.sample(&mut rng)),
        )?;
        let r = sample_rotation(&mut rng);
        let a = si.apply_vector(&v.rotate(&r))?;
        let b = si.apply_vector(&v)?.rotate(&r);
        worst = worst.max((a.data() - b.data()).abs().max());
    }
    Ok(worst)
}

fn centralizer_network(n: usize) -> equivkernel::Result<NetworkSpec> {
    let conv1 = ConvLayer::standard(FilterSpec::position(1), 0.0);
    let conv2 = ConvLayer::identity();
    let l_final = chain_signature(&[conv1.clone(), conv2.clone()]);
    let target = IrrepSignature::new(vec![1]);
    let si = SelfInteraction::new(l_final, target.clone(), &[(1, 0, 1.0 / n as f64)])?;
    Ok(NetworkSpec {
        depth_degree: 1,
        target,
        channels: vec![NetworkChannel { convolutions: vec![conv1, conv2], self_interaction: si }],
    })
}

fn network_equivariance(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let spec = centralizer_network(cfg.points)?;
    check_equivariance(
        move |xc: &PointCloud| {
            Ok(compose_tfn(&spec, xc)?.into_iter().map(|v| v.data().clone()).collect())
        },
        &OutputRep::irreps(&IrrepSignature::new(vec![1])),
        cfg.points,
        cfg.trials.min(20),
        derive_seed(cfg.seed, 24),
    )
}

fn network_centralizer_accuracy(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 25);
    let spec = centralizer_network(cfg.points)?;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(10) {
        let xc = gaussian_cloud(cfg.points, &mut rng);
        let out = compose_tfn(&spec, &xc)?;
        let xb = centralize(&xc);
        for j in 0..cfg.points {
            for i in 0..3 {
                worst = worst.max((out[j].data()[i] - xb.point(j)[i]).abs());
            }
        }
    }
    Ok(worst)
}

fn filter_span_ranks(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 26);
    let rank = |m: &DMatrix<f64>| -> usize {
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values[0];
        svd.singular_values.iter().filter(|&&x| x > 1e-10 * smax).count()
    };
    let mut mismatches = 0usize;
    for s in 0..=3usize {
        let f = FilterSpec::homogeneous(s, 3);
        let npts = 2 * 3usize.pow(s as u32) + 8;
        let fdim = f.signature().dim();
        let tdim = 3usize.pow(s as u32);
        let mut mf = DMatrix::zeros(npts, fdim);
        let mut mt = DMatrix::zeros(npts, tdim);
        for i in 0..npts {
            let x = random_vector(&mut rng);
            mf.row_mut(i).copy_from_slice(f.eval(&x).data().as_slice());
            mt.row_mut(i).copy_from_slice(kron_pow(&x, s).as_slice());
        }
        let expected = (s + 1) * (s + 2) / 2;
        let joined = DMatrix::from_fn(npts, fdim + tdim, |i, j| {
            if j < fdim {
                mf[(i, j)]
            } else {
                mt[(i, j - fdim)]
            }
        });
        if rank(&mf) != expected || rank(&mt) != expected || rank(&joined) != expected {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64)
}

/// The alternative-convolution pairs reproduce both two-parameter layer
/// terms on centralized input (degree <= 1 filters only).
fn alt_pair_minimal_agreement(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 27);
    let n = cfg.points;
    let inv_n = 1.0 / n as f64;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(10) {
        let xc = gaussian_cloud(n, &mut rng);
        let xb = centralize(&xc);
        // Term 1: x_a (x) V_a with V = 1 gives the centralized coordinates.
        let field = FeatureField::ext(&xc);
        let layer = ConvLayer::alternative(FilterSpec::position(1), 0.0, inv_n);
        let out = layer.apply(&field)?;
        for a in 0..n {
            worst = worst.max(out.value(a)[0].abs());
            for i in 0..3 {
                worst = worst.max((out.value(a)[1 + i] - xb.point(a)[i]).abs());
            }
        }
        // Term 2: the pooled product sum_b xbar_b (x) V_b via two layers.
        let sig = IrrepSignature::new(vec![1]);
        let values: Vec<DVector<f64>> = (0..n)
            .map(|_| DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let field = FeatureField::new(xc.clone(), sig.clone(), values.clone())?;
        let first = ConvLayer::alternative(FilterSpec::position(1), -1.0, 0.0);
        let second = ConvLayer::alternative(FilterSpec::averaging(0), inv_n, 0.0);
        let out = second.apply(&first.apply(&field)?)?;
        let cg = cg_decompose(&IrrepSignature::new(vec![0, 1]), &sig)?;
        let mut prod = DVector::zeros(12);
        for b in 0..n {
            for p in 0..3 {
                for q in 0..3 {
                    prod[(1 + p) * 3 + q] += xb.point(b)[p] * values[b][q];
                }
            }
        }
        let expect = cg.apply(&prod)?;
        for a in 0..n {
            let got = out.value(a).rows(0, expect.len()).into_owned();
            let scale = 1.0 + expect.abs().max();
            worst = worst.max((got - &expect).abs().max() / scale);
        }
    }
    Ok(worst)
}

// --- spanning and averaging checks -------------------------------------

fn spanning_samples(cfg: &SuiteConfig, cols_hint: usize) -> usize {
    // Comfortably overdetermined relative to the total feature dimension.
    (2 * cols_hint / cfg.points + 30).max(40)
}

fn q_family_dim(degree: usize) -> usize {
    canonical_multi_indices(degree)
        .iter()
        .map(|r| 3usize.pow(r.total() as u32))
        .sum()
}

fn power_sum_spanning(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.min(3);
    let feats = families::q_family(degree);
    let samples = spanning_samples(cfg, q_family_dim(degree));
    let report = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 30))?;
    Ok(report.max_residual)
}

fn minimal_family_spanning(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.min(3);
    let feats = families::minimal_family(degree);
    let samples = spanning_samples(cfg, q_family_dim(degree));
    let report = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 31))?;
    Ok(report.max_residual)
}

fn conv_family_spanning(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.min(2);
    let feats = families::tfn_family(degree);
    let samples = spanning_samples(cfg, 80);
    let report = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 32))?;
    Ok(report.max_residual)
}

fn alt_family_spanning(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.min(2);
    let feats = families::alt_family(degree, cfg.points);
    let samples = spanning_samples(cfg, 80);
    let report = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 33))?;
    Ok(report.max_residual)
}

fn spanning_negative_control(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.clamp(1, 3);
    let feats = families::q_family(degree - 1);
    let samples = spanning_samples(cfg, q_family_dim(degree - 1));
    let report = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 34))?;
    Ok(report.max_residual)
}

fn equivariance_negative_control(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    check_equivariance(
        |xc: &PointCloud| {
            let p = xc.point(0);
            Ok((0..xc.n()).map(|_| DVector::from_column_slice(p.as_slice())).collect())
        },
        &OutputRep::new(vec![RepBlock::Irrep(1)]),
        cfg.points,
        cfg.trials.min(20),
        derive_seed(cfg.seed, 35),
    )
}

fn spanning_generalization(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let degree = cfg.degree.min(2);
    let feats = families::q_family(degree);
    let samples = spanning_samples(cfg, q_family_dim(degree));
    let a = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 36))?;
    let b = verify_d_spanning(&feats, degree, cfg.points, samples, derive_seed(cfg.seed, 37))?;
    let ratio = a.max_residual.max(1e-11) / b.max_residual.max(1e-11);
    Ok(ratio.log10().abs())
}

fn schur_cross_degree(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 38);
    let quad = haar_quadrature(6);
    let mut worst = 0.0f64;
    for l1 in 0..=3usize {
        for l2 in 0..=3usize {
            if l1 == l2 {
                continue;
            }
            let s1 = IrrepSignature::new(vec![l1]);
            let s2 = IrrepSignature::new(vec![l2]);
            let maps: Vec<DMatrix<f64>> = (0..10)
                .map(|_| {
                    DMatrix::from_fn(s2.dim(), s1.dim(), |_, _| StandardNormal.sample(&mut rng))
                })
                .collect();
            for p in schur_project_many(&s1, &s2, &maps, &quad)? {
                worst = worst.max(p.abs().max());
            }
        }
    }
    Ok(worst)
}

fn schur_matching_scalar(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 39);
    let quad = haar_quadrature(6);
    let mut worst = 0.0f64;
    for l in 0..=3usize {
        let sig = IrrepSignature::new(vec![l]);
        let maps: Vec<DMatrix<f64>> = (0..10)
            .map(|_| DMatrix::from_fn(sig.dim(), sig.dim(), |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        for (a, p) in maps.iter().zip(schur_project_many(&sig, &sig, &maps, &quad)?) {
            let expect = DMatrix::identity(sig.dim(), sig.dim()) * (a.trace() / sig.dim() as f64);
            worst = worst.max((p - expect).abs().max());
        }
    }
    Ok(worst)
}

fn schur_idempotent(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 40);
    let quad = haar_quadrature(4);
    let l1 = IrrepSignature::new(vec![0, 1, 1]);
    let l2 = IrrepSignature::new(vec![1, 2]);
    let a = DMatrix::from_fn(l2.dim(), l1.dim(), |_, _| StandardNormal.sample(&mut rng));
    let p1 = schur_project_many(&l1, &l2, std::slice::from_ref(&a), &quad)?.pop().unwrap();
    let p2 = schur_project_many(&l1, &l2, std::slice::from_ref(&p1), &quad)?.pop().unwrap();
    Ok((&p1 - p2).abs().max())
}

fn schur_dimension_counts(_cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let quad = haar_quadrature(4);
    let mut mismatches = 0usize;
    for (l1, l2, expect) in [
        (IrrepSignature::new(vec![0, 1, 1]), IrrepSignature::new(vec![1]), 2usize),
        (IrrepSignature::new(vec![1, 2]), IrrepSignature::new(vec![1, 2]), 2),
        (IrrepSignature::new(vec![0, 1]), IrrepSignature::new(vec![2]), 0),
    ] {
        let (rows, cols) = (l2.dim(), l1.dim());
        let mut basis = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let mut e = DMatrix::zeros(rows, cols);
                e[(i, j)] = 1.0;
                basis.push(e);
            }
        }
        let projected = schur_project_many(&l1, &l2, &basis, &quad)?;
        let mut stacked = DMatrix::zeros(basis.len(), rows * cols);
        for (k, p) in projected.iter().enumerate() {
            for (idx, v) in p.iter().enumerate() {
                stacked[(k, idx)] = *v;
            }
        }
        let svd = stacked.svd(false, false);
        let smax = svd.singular_values[0];
        let rank = if smax < 1e-12 {
            0
        } else {
            svd.singular_values.iter().filter(|&&s| s > 1e-8 * smax).count()
        };
        if rank != expect {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64)
}

fn symmetrize_fixes_equivariant(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
    let quad = haar_quadrature(3);
    let f = |xc: &PointCloud| {
        let c = centralize(xc);
        Ok((0..xc.n())
            .map(|j| DVector::from_column_slice(c.point(j).as_slice()))
            .collect())
    };
    let sym = symmetrize(f, &quad, &rep);
    let mut rng = rng_for(cfg, 41);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(10) {
        let xc = gaussian_cloud(cfg.points, &mut rng);
        let a = f(&xc)?;
        let b = sym(&xc)?;
        for j in 0..cfg.points {
            worst = worst.max((&a[j] - &b[j]).abs().max());
        }
    }
    Ok(worst)
}

fn symmetrize_conjugation_average(cfg: &SuiteConfig) -> equivkernel::Result<f64> {
    let mut rng = rng_for(cfg, 42);
    let a = nalgebra::Matrix3::from_fn(|_, _| StandardNormal.sample(&mut rng));
    let rep = OutputRep::new(vec![RepBlock::Irrep(1)]);
    let quad = haar_quadrature(2);
    let f = move |xc: &PointCloud| {
        Ok((0..xc.n())
            .map(|j| DVector::from_column_slice((a * xc.point(j)).as_slice()))
            .collect())
    };
    let sym = symmetrize(f, &quad, &rep);
    let factor = a.trace() / 3.0;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(10) {
        let xc = gaussian_cloud(cfg.points, &mut rng);
        let got = sym(&xc)?;
        for j in 0..cfg.points {
            let expect = xc.point(j) * factor;
            worst = worst
                .max((&got[j] - DVector::from_column_slice(expect.as_slice())).abs().max());
        }
    }
    Ok(worst)
}

// --- registry ---------------------------------------------------------------

fn registry() -> Vec<CheckDef> {
    use Direction::*;
    use Suite::*;
    vec![
        CheckDef { name: "so3.wigner-homomorphism", anchor: "block matrices compose like the group: D(R1 R2) = D(R1) D(R2)", suite: So3, tolerance: 1e-10, direction: Below, run: wigner_homomorphism },
        CheckDef { name: "so3.wigner-orthogonality", anchor: "block matrices are orthogonal", suite: So3, tolerance: 1e-10, direction: Below, run: wigner_orthogonality },
        CheckDef { name: "so3.harmonic-covariance", anchor: "harmonics transform by the block matrices: Y(Rx) = D(R) Y(x)", suite: So3, tolerance: 1e-10, direction: Below, run: harmonic_covariance },
        CheckDef { name: "so3.harmonic-homogeneity", anchor: "degree-l harmonics scale like the l-th power", suite: So3, tolerance: 1e-12, direction: Below, run: harmonic_homogeneity },
        CheckDef { name: "so3.degree-one-identities", anchor: "literal degree-1 statements D(R) = R and Y(x) = x", suite: So3, tolerance: 1e-12, direction: Below, run: degree_one_identities },
        CheckDef { name: "so3.quadrature-normalization", anchor: "quadrature weights sum to one", suite: So3, tolerance: 1e-12, direction: Below, run: quadrature_normalization },
        CheckDef { name: "so3.quadrature-block-average", anchor: "group average of a nontrivial block vanishes", suite: So3, tolerance: 1e-12, direction: Below, run: quadrature_block_average },
        CheckDef { name: "so3.quadrature-schur", anchor: "matrix-entry orthogonality under the group average", suite: So3, tolerance: 1e-11, direction: Below, run: quadrature_schur },
        CheckDef { name: "so3.haar-sample-mean", anchor: "sampled rotations average the degree-1 block to zero", suite: So3, tolerance: 0.05, direction: Below, run: haar_sample_mean },
        CheckDef { name: "so3.cg-orthogonality", anchor: "product decompositions are orthogonal matrices", suite: So3, tolerance: 1e-10, direction: Below, run: cg_orthogonality },
        CheckDef { name: "so3.cg-intertwining", anchor: "decomposition intertwines the product action with the block action", suite: So3, tolerance: 1e-10, direction: Below, run: cg_intertwining },
        CheckDef { name: "so3.cg-multiplicity", anchor: "each admissible output degree appears exactly once (null-space count)", suite: So3, tolerance: 0.5, direction: Below, run: cg_multiplicity },
        CheckDef { name: "tensor.centralize-projection", anchor: "centralization is an idempotent translation-killing projection", suite: Tensor, tolerance: 1e-12, direction: Below, run: centralize_projection },
        CheckDef { name: "tensor.minimal-layer-equivariance", anchor: "two-parameter layer commutes with rotations and relabeling", suite: Tensor, tolerance: 1e-10, direction: Below, run: minimal_layer_equivariance },
        CheckDef { name: "tensor.power-sum-factored-vs-nested", anchor: "factored power-sum features equal the literal nested sums", suite: Tensor, tolerance: 1e-12, direction: Below, run: power_sum_factored_vs_nested },
        CheckDef { name: "tensor.minimal-chain-realization", anchor: "layer chains reproduce every power-sum feature", suite: Tensor, tolerance: 1e-10, direction: Below, run: minimal_chain_realization },
        CheckDef { name: "tensor.pool-invariance", anchor: "pooling functionals are rotation invariant", suite: Tensor, tolerance: 1e-10, direction: Below, run: pool_invariance },
        CheckDef { name: "tensor.pool-rank-counts", anchor: "functional family rank equals the invariant-subspace dimension", suite: Tensor, tolerance: 0.5, direction: Below, run: pool_rank_counts },
        CheckDef { name: "irrep.conv-translation-invariance", anchor: "convolutions see point differences only", suite: Irrep, tolerance: 1e-12, direction: Below, run: conv_translation_invariance },
        CheckDef { name: "irrep.conv-permutation-equivariance", anchor: "relabeling points relabels outputs bitwise", suite: Irrep, tolerance: 0.0, direction: Below, run: conv_permutation_equivariance },
        CheckDef { name: "irrep.conv-rotation-equivariance", anchor: "convolution outputs rotate blockwise", suite: Irrep, tolerance: 1e-9, direction: Below, run: conv_rotation_equivariance },
        CheckDef { name: "irrep.self-interaction-equivariance", anchor: "blockwise linear maps commute with the action", suite: Irrep, tolerance: 1e-12, direction: Below, run: self_interaction_equivariance },
        CheckDef { name: "irrep.network-equivariance", anchor: "composed network is equivariant end to end", suite: Irrep, tolerance: 1e-9, direction: Below, run: network_equivariance },
        CheckDef { name: "irrep.network-centralizer-accuracy", anchor: "hand-built network reproduces the centralized cloud", suite: Irrep, tolerance: 1e-8, direction: Below, run: network_centralizer_accuracy },
        CheckDef { name: "irrep.filter-span-ranks", anchor: "homogeneous filters span the tensor-power entries (rank check)", suite: Irrep, tolerance: 0.5, direction: Below, run: filter_span_ranks },
        CheckDef { name: "irrep.alt-pair-minimal-agreement", anchor: "low-degree-filter pairs rebuild both two-parameter layer terms", suite: Irrep, tolerance: 1e-10, direction: Below, run: alt_pair_minimal_agreement },
        CheckDef { name: "spanning.power-sum-family", anchor: "power-sum family spans all bounded-degree equivariant polynomials", suite: Spanning, tolerance: 1e-8, direction: Below, run: power_sum_spanning },
        CheckDef { name: "spanning.minimal-family", anchor: "layer-chain family achieves the same spanning", suite: Spanning, tolerance: 1e-8, direction: Below, run: minimal_family_spanning },
        CheckDef { name: "spanning.conv-family", anchor: "standard convolution chains span through linear readouts", suite: Spanning, tolerance: 1e-6, direction: Below, run: conv_family_spanning },
        CheckDef { name: "spanning.alt-family", anchor: "alternative convolutions with low-degree filters span as well", suite: Spanning, tolerance: 1e-6, direction: Below, run: alt_family_spanning },
        CheckDef { name: "spanning.negative-control", anchor: "an under-powered family must fail the spanning check", suite: Spanning, tolerance: 1e-2, direction: Above, run: spanning_negative_control },
        CheckDef { name: "spanning.equivariance-negative-control", anchor: "a non-equivariant map must fail the equivariance check", suite: Spanning, tolerance: 1e-3, direction: Above, run: equivariance_negative_control },
        CheckDef { name: "spanning.held-out-generalization", anchor: "residuals agree across fresh seeds (within one order)", suite: Spanning, tolerance: 1.0, direction: Below, run: spanning_generalization },
        CheckDef { name: "spanning.schur-cross-degree", anchor: "group-averaged cross-degree maps vanish", suite: Spanning, tolerance: 1e-10, direction: Below, run: schur_cross_degree },
        CheckDef { name: "spanning.schur-matching-scalar", anchor: "group-averaged matching-degree maps are (trace/dim) identity", suite: Spanning, tolerance: 1e-10, direction: Below, run: schur_matching_scalar },
        CheckDef { name: "spanning.schur-idempotent", anchor: "averaging twice equals averaging once", suite: Spanning, tolerance: 1e-11, direction: Below, run: schur_idempotent },
        CheckDef { name: "spanning.schur-dimension-counts", anchor: "equivariant-map space dimension equals the matching-pair count", suite: Spanning, tolerance: 0.5, direction: Below, run: schur_dimension_counts },
        CheckDef { name: "spanning.symmetrize-fixed-point", anchor: "group averaging fixes already-equivariant functions", suite: Spanning, tolerance: 1e-10, direction: Below, run: symmetrize_fixes_equivariant },
        CheckDef { name: "spanning.symmetrize-conjugation", anchor: "averaged linear map collapses to (trace/3) identity", suite: Spanning, tolerance: 1e-11, direction: Below, run: symmetrize_conjugation_average },
    ]
}

/// Names of all registered checks (for validating tolerance overrides).
pub fn check_names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name).collect()
}

/// Runs the configured suite and assembles the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, RunError> {
    for name in cfg.tolerance_overrides.keys() {
        if !registry().iter().any(|c| c.name == name.as_str()) {
            return Err(RunError::Config(ConfigError::UnknownCheck(name.clone())));
        }
    }
    let mut records = Vec::new();
    for def in registry() {
        if cfg.suite != Suite::All && def.suite != cfg.suite {
            continue;
        }
        let tolerance = cfg.tolerance_overrides.get(def.name).copied().unwrap_or(def.tolerance);
        let start = Instant::now();
        let residual = (def.run)(cfg).map_err(|e| RunError::Check {
            name: def.name,
            source: e,
        })?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let pass = match def.direction {
            Direction::Below => residual <= tolerance,
            Direction::Above => residual > tolerance,
        };
        records.push(CheckRecord {
            name: def.name.to_string(),
            anchor: def.anchor.to_string(),
            residual,
            tolerance,
            pass,
            wall_ms,
        });
    }
    Ok(Report::new(cfg, records))
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("check {name} could not run: {source}")]
    Check {
        name: &'static str,
        #[source]
        source: equivkernel::Error,
    },
}
