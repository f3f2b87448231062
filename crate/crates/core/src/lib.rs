//! Simulation and verification toolkit for stationary Poisson hyperplane
//! tessellations.
//!
//! The crate is organised bottom-up:
//!
//! - [`measures`]: finite even atomic measures on spheres, the spherical
//!   projection onto subspaces, the nondegeneracy number `m(φ)` and the
//!   Prokhorov distance.
//! - [`grassmann`]: subspaces, rotations, the rotation defect `|ρ|`, the
//!   Grassmannian metric `Δ` and direct (defect-minimal) rotations.
//! - [`polytope`]: convex polytopes living in a subspace (planar and solid),
//!   built by incremental halfspace clipping.
//! - [`minkowski`]: the discrete Minkowski problem and Blaschke bodies.
//! - [`shape`]: the homothety deviation `ϑ` within and across subspaces.
//! - [`process`]: Poisson hyperplane sampling, zero cells, section processes,
//!   intersection-process directions and weighted typical faces.
//! - [`arrangement`]: the 2-faces of a plane arrangement in a box window.

pub mod arrangement;
mod error;
pub mod grassmann;
mod lp;
pub mod measures;
pub mod minkowski;
pub mod polytope;
pub mod process;
pub mod rng;
pub mod shape;

pub use error::{Error, Result};
pub use grassmann::{Rotation, Subspace};
pub use measures::SphericalMeasure;
pub use polytope::{Halfspace, Polytope};
pub use process::ProcessSpec;
pub use shape::DeviationResult;
