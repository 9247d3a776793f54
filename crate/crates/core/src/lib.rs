//! Laplace–Beltrami spectra of surfaces embedded in 3-space.
//!
//! Three discretisations share one eigensolver:
//!
//! - **cloud-lattice**: the cubic-lattice points within distance `r` of a point
//!   cloud, with the 6-neighbour graph Laplacian scaled by `n²`.
//! - **mesh-lattice**: the same construction seeded by a triangle mesh.
//! - **mesh-cotangent**: the cotangent stiffness matrix with a lumped mass matrix.
//!
//! The [`analytic`] module provides reference spectra for the unit sphere and the
//! cone, and [`harness`] wires everything into the `spectral-lattice` CLI.

pub mod analytic;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod operators;
pub mod sparse;
pub mod timing;

pub use error::{Error, Result};
