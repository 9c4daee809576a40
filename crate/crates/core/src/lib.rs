//! Identification of generalized Maxwell (Wiechert) models from
//! ramp-and-hold relaxation data.
//!
//! The crate is organised bottom-up:
//!
//! - [`forward`]: closed-form stress response, admissible-set checks, an
//!   ODE reference integrator and the ill-posedness probe.
//! - [`synth`] and [`series_io`]: synthetic data with calibrated noise and
//!   the plain-text series format.
//! - [`solver`]: fixed-`n` Tikhonov fits by multistart projected
//!   Levenberg–Marquardt.
//! - [`identify`]: model-order selection (binomial-prior MAP, decade
//!   clustering, plain residual sweep) behind a common
//!   [`identify::IdentificationMethod`] trait.
//! - [`config`]: the flat `section.key = value` configuration format.

pub mod config;
pub mod error;
pub mod forward;
pub mod identify;
pub mod series_io;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use forward::{
    ForwardModel, MaterialParams, NoiseRecord, StrainProgram, StressSeries, DEFAULT_GAMMA,
};
