//! Thin linearly viscoelastic shells of Kelvin-Voigt type.
//!
//! The crate computes the geometry of a shell family `Θ(y, x3) = θ(y) + x3 a_3(y)`,
//! solves the scaled three-dimensional viscoelastic problem for a sequence of
//! thicknesses and the two-dimensional limit membrane problem whose constitutive
//! law carries a long-term memory term, and measures how far the two are apart.
//!
//! Indices follow the usual shell conventions: Greek indices run over `{0, 1}`
//! (the surface directions), Latin indices over `{0, 1, 2}` with `2` the
//! transverse direction.

// Tensor kernels index several arrays with the same component index, and the
// validators use `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fem;
pub mod forces;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod material;
pub mod memory;
pub mod mesh;
pub mod solver2d;
pub mod solver3d;

pub use error::{Error, Result};
pub use exec::Execution;
