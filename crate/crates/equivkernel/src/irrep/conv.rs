//! The two convolution variants.
//!
//! Standard: `V'_a = U( theta_0 V_a + sum_b F(x_a - x_b) (x) V_b )`, the
//! skip term embedded in the degree-0 filter slice of the product (the one
//! degree-preserving equivariant embedding available).
//!
//! Alternative: `V'_a = U( theta_1 sum_b F(x_a - x_b) (x) V_b
//!                        + theta_2 (sum_b F(x_a - x_b)) (x) V_a )`.
//!
//! Both sums include `b = a`; the filter's origin convention decides what
//! that term contributes.

use super::filter::FilterSpec;
use super::FeatureField;
use crate::error::{Error, Result};
use crate::so3::{cg_decompose, Intertwiner};
use nalgebra::DVector;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvKind {
    Standard { theta0: f64 },
    Alternative { theta1: f64, theta2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub filter: FilterSpec,
    pub kind: ConvKind,
}

impl ConvLayer {
    pub fn standard(filter: FilterSpec, theta0: f64) -> ConvLayer {
        ConvLayer { filter, kind: ConvKind::Standard { theta0 } }
    }

    pub fn alternative(filter: FilterSpec, theta1: f64, theta2: f64) -> ConvLayer {
        ConvLayer { filter, kind: ConvKind::Alternative { theta1, theta2 } }
    }

    /// Skip-only layer: zero filter with `theta_0 = 1` leaves the feature
    /// unchanged up to the trivial degree-0 embedding.
    pub fn identity() -> ConvLayer {
        ConvLayer::standard(FilterSpec::zero(0), 1.0)
    }

    /// Applies the layer, deriving the intertwiner from the signatures.
    pub fn apply(&self, field: &FeatureField) -> Result<FeatureField> {
        let cg = cg_decompose(&self.filter.signature(), field.signature())?;
        match self.kind {
            ConvKind::Standard { .. } => tfn_conv(field, self, &cg),
            ConvKind::Alternative { .. } => alt_conv(field, self, &cg),
        }
    }
}

fn check_signatures(field: &FeatureField, layer: &ConvLayer, cg: &Intertwiner) -> Result<()> {
    if cg.lf() != &layer.filter.signature() {
        return Err(Error::SignatureMismatch {
            expected: layer.filter.signature().to_string(),
            found: cg.lf().to_string(),
        });
    }
    if cg.li() != field.signature() {
        return Err(Error::SignatureMismatch {
            expected: field.signature().to_string(),
            found: cg.li().to_string(),
        });
    }
    Ok(())
}

/// Standard convolution. Output signature is `cg.lout()`.
pub fn tfn_conv(field: &FeatureField, layer: &ConvLayer, cg: &Intertwiner) -> Result<FeatureField> {
    let theta0 = match layer.kind {
        ConvKind::Standard { theta0 } => theta0,
        ConvKind::Alternative { .. } => {
            return Err(Error::SignatureMismatch {
                expected: "standard convolution".into(),
                found: "alternative parameters".into(),
            })
        }
    };
    check_signatures(field, layer, cg)?;
    conv_core(field, layer, cg, ConvMode::Standard { theta0 })
}

/// Alternative convolution. Output signature is `cg.lout()`.
pub fn alt_conv(field: &FeatureField, layer: &ConvLayer, cg: &Intertwiner) -> Result<FeatureField> {
    let (theta1, theta2) = match layer.kind {
        ConvKind::Alternative { theta1, theta2 } => (theta1, theta2),
        ConvKind::Standard { .. } => {
            return Err(Error::SignatureMismatch {
                expected: "alternative convolution".into(),
                found: "standard parameters".into(),
            })
        }
    };
    check_signatures(field, layer, cg)?;
    conv_core(field, layer, cg, ConvMode::Alternative { theta1, theta2 })
}

enum ConvMode {
    Standard { theta0: f64 },
    Alternative { theta1: f64, theta2: f64 },
}

/// Partner order for the inner sums, sorted by coordinates rather than by
/// index: summation order must not depend on point labels, or rounding
/// breaks bitwise permutation equivariance.
fn canonical_point_order(cloud: &crate::tensor::PointCloud) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cloud.n()).collect();
    order.sort_by(|&a, &b| {
        let pa = cloud.point(a);
        let pb = cloud.point(b);
        pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y)).then(pa.z.total_cmp(&pb.z))
    });
    order
}

fn conv_core(
    field: &FeatureField,
    layer: &ConvLayer,
    cg: &Intertwiner,
    mode: ConvMode,
) -> Result<FeatureField> {
    let n = field.n();
    let fsig = layer.filter.signature();
    let isig = field.signature();
    let pair_layout = cg.pair_layout();
    let cloud = field.cloud();
    let partner_order = canonical_point_order(cloud);

    let mut out_values = Vec::with_capacity(n);
    for a in 0..n {
        let xa = cloud.point(a);
        // Filter values against every partner, plus their sum for the
        // alternative variant's second term.
        let mut tensors: Vec<DVector<f64>> = pair_layout
            .iter()
            .map(|&(_, _, fd, id)| DVector::zeros(fd * id))
            .collect();
        let mut filter_sum = DVector::zeros(fsig.dim());
        for &b in &partner_order {
            let fv = layer.filter.eval(&(xa - cloud.point(b)));
            filter_sum += fv.data();
            let weight = match mode {
                ConvMode::Standard { .. } => 1.0,
                ConvMode::Alternative { theta1, .. } => theta1,
            };
            if weight == 0.0 {
                continue;
            }
            accumulate_pairs(
                &mut tensors,
                &pair_layout,
                fv.data(),
                field.value(b),
                &fsig,
                isig,
                weight,
            );
        }
        match mode {
            ConvMode::Standard { theta0 } => {
                if theta0 != 0.0 {
                    // Embed theta_0 V_a into the degree-0 filter slice.
                    for (idx, &(fb, ib, _, id)) in pair_layout.iter().enumerate() {
                        if fsig.degrees()[fb] != 0 {
                            continue;
                        }
                        let off = isig.block_offset(ib);
                        for m in 0..id {
                            tensors[idx][m] += theta0 * field.value(a)[off + m];
                        }
                    }
                }
            }
            ConvMode::Alternative { theta2, .. } => {
                if theta2 != 0.0 {
                    accumulate_pairs(
                        &mut tensors,
                        &pair_layout,
                        &filter_sum,
                        field.value(a),
                        &fsig,
                        isig,
                        theta2,
                    );
                }
            }
        }
        out_values.push(cg.apply_pair_tensors(&tensors)?);
    }
    FeatureField::new(cloud.clone(), cg.lout().clone(), out_values)
}

/// Adds `weight * (filter block j) (x) (feature block k)` into each pair
/// tensor.
fn accumulate_pairs(
    tensors: &mut [DVector<f64>],
    layout: &[(usize, usize, usize, usize)],
    filter: &DVector<f64>,
    feature: &DVector<f64>,
    fsig: &crate::so3::IrrepSignature,
    isig: &crate::so3::IrrepSignature,
    weight: f64,
) {
    for (idx, &(fb, ib, fd, id)) in layout.iter().enumerate() {
        let foff = fsig.block_offset(fb);
        let ioff = isig.block_offset(ib);
        let t = &mut tensors[idx];
        for p in 0..fd {
            let fv = filter[foff + p];
            if fv == 0.0 {
                continue;
            }
            let w = weight * fv;
            let base = p * id;
            for q in 0..id {
                t[base + q] += w * feature[ioff + q];
            }
        }
    }
}
