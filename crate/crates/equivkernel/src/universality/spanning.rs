//! Spanning certification by rank-revealing least squares.
//!
//! A feature family spans degree `D` if every basis polynomial factors
//! through pointwise linear readouts of the features. The verifier samples
//! Gaussian clouds, solves for the readout coefficients on a training set,
//! and reports relative residuals on a held-out set of the same size —
//! fitting and judging on the same samples would reward overfitting the
//! linear system.

use super::alpha::{enumerate_alpha, p_alpha_basis, AlphaIndex};
use super::{derive_seed, gaussian_cloud};
use crate::error::{Error, Result};
use crate::tensor::{centralize, PointCloud};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub type FeatureFn = Box<dyn Fn(&PointCloud) -> Result<Vec<DVector<f64>>> + Send + Sync>;

/// A named point-cloud feature function with fixed per-point output length.
pub struct NamedFeature {
    pub name: String,
    pub f: FeatureFn,
}

impl NamedFeature {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&PointCloud) -> Result<Vec<DVector<f64>>> + Send + Sync + 'static,
    ) -> Self {
        NamedFeature { name: name.into(), f: Box::new(f) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetFit {
    /// Display form of the exponent index.
    pub target: String,
    pub residual: f64,
    pub coefficient_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpanningReport {
    pub degree: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub targets: Vec<TargetFit>,
}

/// Absolute magnitude below which a sampled target is the zero function.
///
/// Targets whose every evaluation is at rounding level (for example a
/// summed factor of degree one composed with centralization) are spanned
/// exactly by the zero readout; fitting their noise would only amplify it.
const NULL_TARGET_TOL: f64 = 1e-10;

/// Certifies that the features span all degree-`max_degree` basis
/// polynomials on centralized clouds. `samples` clouds of `n` points train
/// the readouts; a fresh set of equal size judges them.
pub fn verify_d_spanning(
    features: &[NamedFeature],
    max_degree: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<SpanningReport> {
    let targets = enumerate_alpha(max_degree);
    let train = FeatureTable::build(features, n, samples, derive_seed(seed, 0xA))?;
    let holdout = FeatureTable::build(features, n, samples, derive_seed(seed, 0xB))?;
    if train.matrix.nrows() < train.matrix.ncols() {
        return Err(Error::Underdetermined {
            rows: train.matrix.nrows(),
            cols: train.matrix.ncols(),
        });
    }
    let svd = train.matrix.clone().svd(true, true);
    let cutoff = 1e-10 * svd.singular_values[0];

    let mut fits = Vec::with_capacity(targets.len());
    let mut max_residual = 0.0f64;
    for alpha in &targets {
        let b_train = train.target_vector(alpha);
        let b_hold = holdout.target_vector(alpha);
        let (residual, coeff_norm) =
            if b_train.abs().max() < NULL_TARGET_TOL && b_hold.abs().max() < NULL_TARGET_TOL {
                (0.0, 0.0)
            } else {
                let mut coeffs = svd.solve(&b_train, cutoff).map_err(|e| {
                    Error::DimensionMismatch { detail: format!("least squares failed: {e}") }
                })?;
                // Two rounds of iterative refinement on the same
                // factorization recover the digits the one-shot solve
                // leaves behind on clustered spectra.
                for _ in 0..2 {
                    let r = &b_train - &train.matrix * &coeffs;
                    let delta = svd.solve(&r, cutoff).map_err(|e| {
                        Error::DimensionMismatch { detail: format!("least squares failed: {e}") }
                    })?;
                    coeffs += delta;
                }
                let misfit = (&holdout.matrix * &coeffs - &b_hold).norm();
                (misfit / b_hold.norm().max(1e-12), coeffs.norm())
            };
        max_residual = max_residual.max(residual);
        fits.push(TargetFit {
            target: alpha.to_string(),
            residual,
            coefficient_norm: coeff_norm,
        });
    }
    Ok(SpanningReport {
        degree: max_degree,
        sample_count: samples,
        seed,
        max_residual,
        targets: fits,
    })
}

struct FeatureTable {
    /// `(samples * n) x total_feature_dim`, rows grouped by sample.
    matrix: DMatrix<f64>,
    /// Centralized clouds, for target evaluation.
    clouds: Vec<PointCloud>,
    n: usize,
}

impl FeatureTable {
    fn build(features: &[NamedFeature], n: usize, samples: usize, seed: u64) -> Result<Self> {
        let mut clouds = Vec::with_capacity(samples);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(samples * n);
        let mut total_dim = None;
        for s in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64));
            let xc = gaussian_cloud(n, &mut rng);
            let mut per_point: Vec<Vec<f64>> = vec![Vec::new(); n];
            for feat in features {
                let vals = (feat.f)(&xc)?;
                if vals.len() != n {
                    return Err(Error::PointCountMismatch { expected: n, found: vals.len() });
                }
                for (j, v) in vals.iter().enumerate() {
                    per_point[j].extend_from_slice(v.as_slice());
                }
            }
            let dim = per_point[0].len();
            match total_dim {
                None => total_dim = Some(dim),
                Some(d) if d != dim => {
                    return Err(Error::DimensionMismatch {
                        detail: format!("feature dimension changed between samples: {d} vs {dim}"),
                    })
                }
                _ => {}
            }
            rows.extend(per_point);
            clouds.push(centralize(&xc));
        }
        let dim = total_dim.unwrap_or(0);
        let matrix = DMatrix::from_fn(samples * n, dim, |i, j| rows[i][j]);
        Ok(FeatureTable { matrix, clouds, n })
    }

    fn target_vector(&self, alpha: &AlphaIndex) -> DVector<f64> {
        let mut out = DVector::zeros(self.clouds.len() * self.n);
        for (s, xb) in self.clouds.iter().enumerate() {
            let vals = p_alpha_basis(xb, alpha);
            for (j, v) in vals.iter().enumerate() {
                out[s * self.n + j] = *v;
            }
        }
        out
    }
}

/// Standard feature families, all built from the constructive layer
/// recipes.
pub mod families {
    use super::*;
    use crate::irrep::{ConvLayer, FeatureField, FilterSpec};
    use crate::tensor::{
        canonical_multi_indices, compose_minimal, minimal_layers_for, q_r_oracle, MultiIndexR,
    };

    /// The power-sum tensor features on centralized clouds, one per
    /// canonical index with total at most `max_degree`.
    pub fn q_family(max_degree: usize) -> Vec<NamedFeature> {
        canonical_multi_indices(max_degree)
            .into_iter()
            .map(|r| {
                let name = format!("q{r}");
                NamedFeature::new(name, move |xc: &PointCloud| {
                    let q = q_r_oracle(&centralize(xc), &r)?;
                    Ok(q.data().to_vec())
                })
            })
            .collect()
    }

    /// The same features realized through two-parameter layer chains.
    pub fn minimal_family(max_degree: usize) -> Vec<NamedFeature> {
        canonical_multi_indices(max_degree)
            .into_iter()
            .map(|r| {
                let layers = minimal_layers_for(&r).expect("canonical index");
                let name = format!("minimal{r}");
                NamedFeature::new(name, move |xc: &PointCloud| {
                    let out = compose_minimal(xc, &layers)?;
                    Ok(out.data().to_vec())
                })
            })
            .collect()
    }

    /// Convolution chain realizing (a linear image of) the power-sum
    /// feature for one index, padded with skip layers to `2 max_degree`
    /// convolutions.
    fn standard_chain(r: &MultiIndexR, max_degree: usize) -> Vec<ConvLayer> {
        fn inner(entries: &[usize]) -> Vec<ConvLayer> {
            if entries.iter().sum::<usize>() == 0 {
                return Vec::new();
            }
            let r1 = entries[0];
            if r1 > 0 {
                let mut chain = inner(&entries[1..]);
                chain.push(ConvLayer::standard(FilterSpec::homogeneous(r1, r1), 0.0));
                chain
            } else {
                let mut reduced = entries[1..].to_vec();
                reduced[0] -= 1;
                let mut chain = inner(&reduced);
                chain.push(ConvLayer::standard(FilterSpec::homogeneous(1, 1), 0.0));
                chain.push(ConvLayer::standard(FilterSpec::averaging(0), 0.0));
                chain
            }
        }
        let mut chain = inner(r.entries());
        while chain.len() < 2 * max_degree {
            chain.push(ConvLayer::identity());
        }
        chain
    }

    fn run_chain(chain: &[ConvLayer], xc: &PointCloud) -> Result<Vec<DVector<f64>>> {
        let mut field = FeatureField::ext(xc);
        for conv in chain {
            field = conv.apply(&field)?;
        }
        Ok(field.values().to_vec())
    }

    /// The standard-convolution family: one chain per canonical index.
    pub fn tfn_family(max_degree: usize) -> Vec<NamedFeature> {
        canonical_multi_indices(max_degree)
            .into_iter()
            .map(|r| {
                let chain = standard_chain(&r, max_degree);
                let name = format!("conv{r}");
                NamedFeature::new(name, move |xc: &PointCloud| run_chain(&chain, xc))
            })
            .collect()
    }

    /// The low-degree-filter alternative family: each two-parameter layer
    /// becomes a pair of alternative convolutions with filters of degree at
    /// most one. Coefficients depend on the point count.
    pub fn alt_family(max_degree: usize, n: usize) -> Vec<NamedFeature> {
        let inv_n = 1.0 / n as f64;
        canonical_multi_indices(max_degree)
            .into_iter()
            .map(|r| {
                let steps = minimal_layers_for(&r).expect("canonical index");
                let mut chain = Vec::new();
                for (t1, t2) in steps {
                    if t1 == 1.0 && t2 == 0.0 {
                        // x_j (x) V_j in one convolution, then hold.
                        chain.push(ConvLayer::alternative(FilterSpec::position(1), 0.0, inv_n));
                        chain.push(ConvLayer::alternative(FilterSpec::averaging(0), 0.0, inv_n));
                    } else {
                        // sum_i x_i (x) V_i: difference convolution, then
                        // average away the stray term.
                        chain.push(ConvLayer::alternative(FilterSpec::position(1), -1.0, 0.0));
                        chain.push(ConvLayer::alternative(FilterSpec::averaging(0), inv_n, 0.0));
                    }
                }
                while chain.len() < 2 * max_degree {
                    chain.push(ConvLayer::alternative(FilterSpec::averaging(0), 0.0, inv_n));
                }
                let name = format!("alt{r}");
                NamedFeature::new(name, move |xc: &PointCloud| run_chain(&chain, xc))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_family_spans_degree_two() {
        let feats = families::q_family(2);
        let report = verify_d_spanning(&feats, 2, 4, 40, 2024).unwrap();
        assert!(report.max_residual < 1e-8, "max residual {}", report.max_residual);
    }

    #[test]
    fn underpowered_family_fails_loudly() {
        let feats = families::q_family(1);
        let report = verify_d_spanning(&feats, 2, 4, 40, 2024).unwrap();
        assert!(report.max_residual > 1e-2, "should not span: {}", report.max_residual);
    }

    #[test]
    fn insufficient_samples_is_an_error() {
        let feats = families::q_family(2);
        assert!(matches!(
            verify_d_spanning(&feats, 2, 4, 2, 1),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn held_out_residuals_generalize_across_seeds() {
        let feats = families::q_family(2);
        let a = verify_d_spanning(&feats, 2, 4, 40, 7).unwrap();
        let b = verify_d_spanning(&feats, 2, 4, 40, 8).unwrap();
        let fa = a.max_residual.max(1e-11);
        let fb = b.max_residual.max(1e-11);
        let ratio = fa / fb;
        assert!((0.1..=10.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn minimal_family_matches_q_family_residuals() {
        let q = verify_d_spanning(&families::q_family(2), 2, 4, 40, 11).unwrap();
        let m = verify_d_spanning(&families::minimal_family(2), 2, 4, 40, 11).unwrap();
        assert!(q.max_residual < 1e-8);
        assert!(m.max_residual < 1e-8, "minimal family: {}", m.max_residual);
    }

    #[test]
    fn standard_conv_family_spans_degree_one() {
        let feats = families::tfn_family(1);
        let report = verify_d_spanning(&feats, 1, 4, 30, 13).unwrap();
        assert!(report.max_residual < 1e-6, "{}", report.max_residual);
    }

    #[test]
    fn alt_family_spans_degree_one() {
        let feats = families::alt_family(1, 4);
        let report = verify_d_spanning(&feats, 1, 4, 30, 17).unwrap();
        assert!(report.max_residual < 1e-6, "{}", report.max_residual);
    }
}
