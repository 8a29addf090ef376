//! Library side of the command-line tool: configuration, cloud I/O, the
//! check registry, and report assembly. The binary in `main.rs` is a thin
//! wrapper so integration tests can drive everything in-process.

// Index-heavy checks read better with explicit loops.
#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod cloud_io;
pub mod config;
pub mod eval;
pub mod report;

pub use checks::run_suite;
pub use cloud_io::{load_cloud, save_cloud, CloudFormat};
pub use config::{Suite, SuiteConfig};
pub use eval::evaluate_network;
pub use report::{CheckRecord, Report};
