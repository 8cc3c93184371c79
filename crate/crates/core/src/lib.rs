//! Radial finite-volume laboratory for the doubly nonlinear
//! reaction-diffusion equation `u_t = Delta_p u^m + u^q` on rotationally
//! symmetric model manifolds.
//!
//! The crate provides the geometry (`geometry`), the spatial discretization
//! and operators (`grid`, `operators`), an explicit monotone time stepper
//! with truncated reaction and vanishing viscosity (`evolution`, `datum`,
//! `ladder`), the control functionals and decay fits used to probe
//! smoothing estimates (`monitors`, `exponents`), exact reference solutions
//! (`oracles`), Rayleigh-quotient probes of the Sobolev and Poincare
//! inequalities (`inequalities`), and field/series serialization (`io`).

pub mod error;
pub mod numerics;
pub mod geometry;
pub mod grid;
pub mod operators;
pub mod exponents;
pub mod monitors;
pub mod evolution;
pub mod datum;
pub mod ladder;
pub mod oracles;
pub mod inequalities;
pub mod io;

pub use error::{Error, Result};
