//! Pseudohermitian invariants of deformed CR structures on the 3-sphere, with exact spectral
//! linear theory and a fixed-point deformation solver.

pub mod algebra;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod io;
pub mod jet;
pub mod linear;
pub mod poly;
pub mod random;
pub mod report;
pub mod scalar;
pub mod solvers;
pub mod verify;

pub use error::{CrError, Result};
pub use harmonic::{
    from_harmonic, fs_norm, harmonic_basis, project_pq, to_harmonic, HarmonicField,
};
pub use poly::{Poly, PolyFn};
pub use scalar::{GaussianRational, Scalar};
