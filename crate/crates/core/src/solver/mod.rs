//! Fixed-`n` parameter fitting: projected Levenberg–Marquardt on the
//! Tikhonov functional, restarted from many initial points, with an optional
//! discrepancy-principle stop.
//!
//! The misfit is always `½‖F_n(x) − σ^δ‖²` here. Callers that compare
//! candidates with `‖·‖²` (the MAP objective) double it.

mod lm;
mod multistart;
mod problem;

pub use lm::{LmRun, StopReason};
pub use multistart::{minimize_fixed_n, minimize_fixed_n_from, nested_starts, start_points, FitResult};
pub use problem::{FixedNProblem, ObjectiveParts};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which stabilizing term the inner fit adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    None,
    /// `Ω₁(x) = ½‖x‖²`
    FullNorm,
    /// `Ω₂(x) = ½τ₁²`, `τ₁` the smallest relaxation time.
    Tau1Only,
}

impl PenaltyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PenaltyKind::None => "none",
            PenaltyKind::FullNorm => "full_norm",
            PenaltyKind::Tau1Only => "tau1_only",
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PenaltyKind::None),
            "full_norm" => Ok(PenaltyKind::FullNorm),
            "tau1_only" => Ok(PenaltyKind::Tau1Only),
            other => Err(Error::config(format!(
                "unknown penalty {other:?} (expected none, full_norm or tau1_only)"
            ))),
        }
    }
}

/// Penalty kind and its weight `α`. A `None` kind always has weight zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
    weight: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::config(format!(
                "penalty weight must be finite and non-negative, got {weight}"
            )));
        }
        let weight = if kind == PenaltyKind::None { 0.0 } else { weight };
        Ok(Self { kind, weight })
    }

    pub fn none() -> Self {
        Self {
            kind: PenaltyKind::None,
            weight: 0.0,
        }
    }

    pub fn full_norm(weight: f64) -> Self {
        Self::new(PenaltyKind::FullNorm, weight).expect("valid penalty weight")
    }

    pub fn tau1_only(weight: f64) -> Self {
        Self::new(PenaltyKind::Tau1Only, weight).expect("valid penalty weight")
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self::none()
    }
}

/// Knobs of [`minimize_fixed_n`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of initial points.
    pub multistarts: usize,
    pub max_iterations: usize,
    /// Stop when the projected gradient, relative to `1 + objective`, falls
    /// below this.
    pub gradient_tol: f64,
    /// Stop when an accepted step is shorter than this, relative to `‖x‖`.
    pub step_tol: f64,
    /// Discrepancy factor `ζ > 1`: a run stops once `‖F_n(x) − σ^δ‖ ≤ ζ δ`.
    pub zeta: f64,
    pub damping_initial: f64,
    /// Damping is multiplied by this on a rejected step and divided by it on
    /// an accepted one.
    pub damping_factor: f64,
    /// Range of the uniform draw for stiffness start values.
    pub stiffness_start_range: (f64, f64),
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            multistarts: 24,
            max_iterations: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-12,
            zeta: 1.5,
            damping_initial: 1e-3,
            damping_factor: 10.0,
            stiffness_start_range: (0.1, 50.0),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.multistarts == 0 {
            return Err(Error::config("solver.multistarts must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("solver.max_iterations must be at least 1"));
        }
        if !(self.zeta.is_finite() && self.zeta > 1.0) {
            return Err(Error::config(format!(
                "solver.zeta must exceed 1, got {}",
                self.zeta
            )));
        }
        for (name, v) in [
            ("solver.gradient_tol", self.gradient_tol),
            ("solver.step_tol", self.step_tol),
            ("solver.damping_initial", self.damping_initial),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.damping_factor.is_finite() && self.damping_factor > 1.0) {
            return Err(Error::config("solver.damping_factor must exceed 1"));
        }
        let (lo, hi) = self.stiffness_start_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(Error::config(format!(
                "invalid stiffness start range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}
