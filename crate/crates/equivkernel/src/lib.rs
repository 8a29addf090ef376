//! Rotation-equivariant point-cloud features with a numerical verification
//! harness.
//!
//! The crate has four layers:
//!
//! - [`so3`] — rotation-group primitives: Haar sampling and quadrature, real
//!   solid harmonics, Wigner matrices for the irreducible blocks, and
//!   Clebsch-Gordan intertwiners that decompose tensor products of blocks.
//! - [`tensor`] — features valued in plain Kronecker tensor powers of R^3:
//!   centralization, power-sum tensor features, the minimal two-parameter
//!   layer, and linear rotation-invariant pooling functionals.
//! - [`irrep`] — the convolutional layer family over direct sums of
//!   irreducible blocks: radial-polynomial filters, standard and alternative
//!   convolutions, self-interactions, and the network composer.
//! - [`universality`] — the harness: equivariance checks against the full
//!   symmetry group (translation, rotation, relabeling), the
//!   permutation-equivariant polynomial basis, spanning certification by
//!   rank-revealing least squares, and group-averaging projections.
//!
//! Reference (slow, independent) evaluators used as oracles by the
//! verification suites live in [`reference`].
//!
//! All numeric conventions (basis ordering, sign rules, quadrature layout)
//! are pinned in [`so3::CONVENTIONS`].

// Index-heavy tensor arithmetic reads better with explicit loops.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod irrep;
pub mod reference;
pub mod so3;
pub mod tensor;
pub mod universality;

pub use error::{Error, Result};
