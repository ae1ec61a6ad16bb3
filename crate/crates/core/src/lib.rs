//! Numerical toolkit for polyhedral Finsler geometry: exact gauge and dual
//! evaluation, subdifferential faces and tangent spaces, compatible operator
//! pairs, mollified shielding norms, lattice growth schemes and a verification
//! bench built on top of them.

pub mod bench;
pub mod error;
pub mod exec;
pub mod finsler;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod shielding;
pub mod simplex;

pub use error::{Error, Result};
pub use finsler::PolyhedralNorm;
pub use linalg::{SymMatrix, Subspace, Vector};
