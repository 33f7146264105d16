//! A desk-scale numerical laboratory for pilot-wave particle dynamics and
//! weak position/velocity measurements.
//!
//! The library covers four layers:
//!
//! - [`wavefield`]: wavefunctions on uniform 1D/2D grids with split-step
//!   spectral Schrödinger evolution, plus closed-form free Gaussian
//!   references in [`analytic`].
//! - [`guidance`]: the family of guidance velocity fields (standard,
//!   divergence-free-modified, Nelson-stochastic) and trajectory
//!   integration against any [`provider::WaveAt`] history.
//! - [`ensemble`]: Born-rule sampling, ensemble pushes and the
//!   Kolmogorov–Smirnov machinery behind equivariance and screen-level
//!   indistinguishability tests.
//! - [`weakvalue`] / [`protocol`]: the von Neumann pointer model with
//!   post-selection and weak values in finite dimensions, and the full
//!   weak-velocity measurement protocol on a particle⊗pointer composite,
//!   including the correspondence-assumption discrepancy tests.

#![allow(clippy::too_many_arguments)]

pub mod analytic;
pub mod constants;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod fourier;
pub mod grid;
pub mod history;
pub mod guidance;
pub mod protocol;
pub mod provider;
pub mod stats;
pub mod wavefield;
pub mod weakvalue;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use grid::{Axis, Grid};
pub use wavefield::{Potential, WaveFunction};
