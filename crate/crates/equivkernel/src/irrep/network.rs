//! Network assembly: per-channel convolution chains pooled into a shared
//! target signature, summed over channels.
//!
//! The JSON wire format is versioned (`network-spec-v1`); field names are
//! pinned in `docs/network-spec-schema.md`.

use super::conv::{ConvKind, ConvLayer};
use super::filter::FilterSpec;
use super::self_interact::SelfInteraction;
use super::FeatureField;
use crate::error::{Error, Result};
use crate::so3::{cg_output_signature, IrrepSignature, IrrepVector};
use crate::tensor::PointCloud;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct NetworkChannel {
    pub convolutions: Vec<ConvLayer>,
    pub self_interaction: SelfInteraction,
}

#[derive(Debug, Clone)]
pub struct NetworkSpec {
    /// `D`: each channel runs exactly `2 D` convolutions.
    pub depth_degree: usize,
    pub target: IrrepSignature,
    pub channels: Vec<NetworkChannel>,
}

impl NetworkSpec {
    pub const SCHEMA: &'static str = "network-spec-v1";

    /// Signature after each convolution of a channel, starting from the
    /// scalar input.
    pub fn signature_chain(channel: &NetworkChannel) -> Vec<IrrepSignature> {
        let mut sigs = vec![IrrepSignature::new(vec![0])];
        for conv in &channel.convolutions {
            let cur = sigs.last().unwrap();
            sigs.push(cg_output_signature(&conv.filter.signature(), cur));
        }
        sigs
    }

    /// Checks layer counts and signature chaining for every channel.
    pub fn validate(&self) -> Result<()> {
        for (ci, ch) in self.channels.iter().enumerate() {
            if ch.convolutions.len() != 2 * self.depth_degree {
                return Err(Error::ChainingMismatch {
                    channel: ci,
                    layer: ch.convolutions.len(),
                    detail: format!(
                        "expected {} convolutions for depth degree {}, found {}",
                        2 * self.depth_degree,
                        self.depth_degree,
                        ch.convolutions.len()
                    ),
                });
            }
            let chain = Self::signature_chain(ch);
            let final_sig = chain.last().unwrap();
            if ch.self_interaction.l_in() != final_sig {
                return Err(Error::ChainingMismatch {
                    channel: ci,
                    layer: ch.convolutions.len(),
                    detail: format!(
                        "self-interaction expects input {}, chain produces {}",
                        ch.self_interaction.l_in(),
                        final_sig
                    ),
                });
            }
            if ch.self_interaction.l_out() != &self.target {
                return Err(Error::ChainingMismatch {
                    channel: ci,
                    layer: ch.convolutions.len() + 1,
                    detail: format!(
                        "self-interaction maps to {}, network target is {}",
                        ch.self_interaction.l_out(),
                        self.target
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(WireNetwork::from(self)).expect("wire form serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&WireNetwork::from(self)).expect("wire form serializes")
    }

    pub fn from_json_str(s: &str) -> Result<NetworkSpec> {
        let wire: WireNetwork = serde_json::from_str(s).map_err(|e| Error::DimensionMismatch {
            detail: format!("network spec parse error: {e}"),
        })?;
        wire.try_into()
    }
}

/// Evaluates the network: per channel, extend the cloud with the constant
/// feature, run the convolutions, extract the feature coordinate, pool
/// through the self-interaction; then sum channels (ascending index).
pub fn compose_tfn(spec: &NetworkSpec, xc: &PointCloud) -> Result<Vec<IrrepVector>> {
    spec.validate()?;
    let n = xc.n();
    let mut acc: Vec<DVector<f64>> = vec![DVector::zeros(spec.target.dim()); n];
    for ch in &spec.channels {
        let mut field = FeatureField::ext(xc);
        for conv in &ch.convolutions {
            field = conv.apply(&field)?;
        }
        let pooled = ch.self_interaction.apply_field(&field)?;
        for j in 0..n {
            acc[j] += pooled.value(j);
        }
    }
    acc.into_iter().map(|v| IrrepVector::new(spec.target.clone(), v)).collect()
}

// --- wire format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WireNetwork {
    schema: String,
    depth_degree: usize,
    target: Vec<usize>,
    channels: Vec<WireChannel>,
}

#[derive(Serialize, Deserialize)]
struct WireChannel {
    convolutions: Vec<WireConv>,
    self_interaction: WireSelfInteraction,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum WireConv {
    Standard { theta0: f64, filter: WireFilter },
    Alternative { theta1: f64, theta2: f64, filter: WireFilter },
}

#[derive(Serialize, Deserialize)]
struct WireFilter {
    max_degree: usize,
    radial: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct WireSelfInteraction {
    input: Vec<usize>,
    output: Vec<usize>,
    entries: Vec<WireEntry>,
}

#[derive(Serialize, Deserialize)]
struct WireEntry {
    row: usize,
    col: usize,
    value: f64,
}

impl From<&NetworkSpec> for WireNetwork {
    fn from(spec: &NetworkSpec) -> Self {
        WireNetwork {
            schema: NetworkSpec::SCHEMA.to_string(),
            depth_degree: spec.depth_degree,
            target: spec.target.degrees().to_vec(),
            channels: spec
                .channels
                .iter()
                .map(|ch| WireChannel {
                    convolutions: ch
                        .convolutions
                        .iter()
                        .map(|c| {
                            let filter = WireFilter {
                                max_degree: c.filter.max_degree(),
                                radial: c.filter.radial().to_vec(),
                            };
                            match c.kind {
                                ConvKind::Standard { theta0 } => {
                                    WireConv::Standard { theta0, filter }
                                }
                                ConvKind::Alternative { theta1, theta2 } => {
                                    WireConv::Alternative { theta1, theta2, filter }
                                }
                            }
                        })
                        .collect(),
                    self_interaction: WireSelfInteraction {
                        input: ch.self_interaction.l_in().degrees().to_vec(),
                        output: ch.self_interaction.l_out().degrees().to_vec(),
                        entries: ch
                            .self_interaction
                            .entries()
                            .into_iter()
                            .map(|(row, col, value)| WireEntry { row, col, value })
                            .collect(),
                    },
                })
                .collect(),
        }
    }
}

impl TryFrom<WireNetwork> for NetworkSpec {
    type Error = Error;

    fn try_from(wire: WireNetwork) -> Result<NetworkSpec> {
        if wire.schema != NetworkSpec::SCHEMA {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "unsupported network spec schema {:?}, expected {:?}",
                    wire.schema,
                    NetworkSpec::SCHEMA
                ),
            });
        }
        let target = IrrepSignature::new(wire.target);
        let channels = wire
            .channels
            .into_iter()
            .map(|ch| {
                let convolutions = ch
                    .convolutions
                    .into_iter()
                    .map(|c| match c {
                        WireConv::Standard { theta0, filter } => Ok(ConvLayer::standard(
                            FilterSpec::new(filter.max_degree, filter.radial)?,
                            theta0,
                        )),
                        WireConv::Alternative { theta1, theta2, filter } => {
                            Ok(ConvLayer::alternative(
                                FilterSpec::new(filter.max_degree, filter.radial)?,
                                theta1,
                                theta2,
                            ))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let entries: Vec<(usize, usize, f64)> = ch
                    .self_interaction
                    .entries
                    .iter()
                    .map(|e| (e.row, e.col, e.value))
                    .collect();
                let self_interaction = SelfInteraction::new(
                    IrrepSignature::new(ch.self_interaction.input),
                    IrrepSignature::new(ch.self_interaction.output),
                    &entries,
                )?;
                Ok(NetworkChannel { convolutions, self_interaction })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = NetworkSpec { depth_degree: wire.depth_degree, target, channels };
        spec.validate()?;
        Ok(spec)
    }
}
