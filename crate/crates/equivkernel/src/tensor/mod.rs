//! Features valued in Kronecker tensor powers of R^3.
//!
//! The rotation action on an order-`k` tensor is the `k`-fold Kronecker
//! power; permutations act on the point index; translation invariance is
//! handled once, up front, by [`centralize`]. Index layout is lexicographic
//! with the first factor slowest throughout.

mod cloud;
mod ops;
mod pool;

pub use cloud::{centralize, PointCloud};
pub use ops::{
    canonical_multi_indices, compose_minimal, kron_pow, minimal_layer, minimal_layers_for,
    q_r_oracle, MultiIndexR, TensorDirectSum, TensorFeature, MAX_TENSOR_ORDER,
};

pub(crate) use ops::apply_kron_rot;
pub use pool::{apply_pool, invariant_functionals, InvariantFunctional};
