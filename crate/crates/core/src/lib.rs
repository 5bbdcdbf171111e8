//! Mimetic (compatible) spectral elements on tensor-product meshes.
//!
//! Degrees of freedom are integral quantities attached to the oriented
//! points, lines, surfaces and volumes of a box mesh. Derivatives act on
//! them through integer incidence matrices, and the reconstruction built
//! from Lagrange and edge polynomials commutes with grad, curl and div.
//! The Stokes solver built on top of this yields velocity fields whose
//! reconstructed divergence vanishes pointwise.
//!
//! Layout of the crate, bottom-up:
//!
//! - [`basis`]: GLL/Gauss rules, Lagrange and edge polynomials.
//! - [`topology`]: cell complexes and the incidence matrices `G`, `C`, `D`.
//! - [`mimetic`]: reduction, reconstruction and projection of fields.
//! - [`assembly`]: mass matrices and the mixed Stokes system.
//! - [`solver`]: sparse direct solve and post-processing.
//! - [`analysis`]: error norms, convergence studies, inf-sup constant.
//! - [`cases`]: the lid-driven cavities and the manufactured no-slip flow.

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod cases;
pub mod error;
pub mod mimetic;
pub mod solver;
pub mod sparse;
pub mod topology;

pub use error::{Error, Result};

/// Physical point; the third coordinate is ignored in 2D.
pub type Point = [f64; 3];
