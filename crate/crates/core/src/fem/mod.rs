//! Finite element building blocks shared by the 2D and 3D solvers.

pub mod lanczos;
pub mod quadrature;
pub mod shape;
pub mod sparse;

pub use quadrature::{gauss_legendre, TriangleRule};
pub use sparse::{Factorization, SparseMatrix, TripletBuilder};
