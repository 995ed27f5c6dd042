//! Scenario runner for `viscoshell`: built-in and TOML-configured shell
//! scenarios, the thickness-sweep convergence experiment, module property
//! suites and deterministic CSV reports.

// Tensor loops index several arrays at once, and validators use `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod convergence;
pub mod error;
pub mod properties;
pub mod report;
pub mod scenario;

pub use error::{HarnessError, Result};
