//! Particle simulation and measurement toolkit for the two-dimensional
//! spatially homogeneous Boltzmann equation with hard potentials and a
//! non-cutoff angular kernel `b(θ) = |θ|^{-1-ν}`.
//!
//! * [`kernel`]: cross-section transforms, cutoff schedules and collision geometry.
//! * [`exponents`]: closed-form exponents and regime classification.
//! * [`sim`]: the N-particle jump process.
//! * [`measure`]: density estimates, tails, moments and fits.
//! * [`verify`]: the built-in acceptance checks.

pub mod config;
pub mod error;
pub mod exponents;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod rng;
pub mod sim;
pub mod vec2;
pub mod verify;

pub use error::{LabError, Result};
pub use vec2::Vec2;
