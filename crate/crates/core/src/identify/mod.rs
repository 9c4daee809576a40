//! Model-order selection.
//!
//! Three pipelines pick the number of Maxwell elements:
//!
//! - [`bayes_identify`]: greedy search over a candidate set for the minimum
//!   of `Φ(n) = ‖F_n(x_n) − σ^δ‖² + α·logg(n)`, the MAP estimate under a
//!   binomial prior.
//! - [`cluster_identify`]: one generous fit, then elements whose relaxation
//!   times share a decade are merged.
//! - [`residual_identify`]: plain misfit minimization over the candidates;
//!   over-fits by construction and serves as a baseline.
//!
//! Each pipeline is also available as an [`IdentificationMethod`] in a
//! [`MethodRegistry`], so front ends can select one by name.

mod bayes;
mod cache;
mod cluster;
pub mod prior;
mod registry;
mod report;
mod residual;

pub use bayes::{bayes_identify, bayes_identify_cached};
pub use cache::FitCache;
pub use cluster::{cluster_identify, cluster_identify_cached, decade_partition, merge_cluster, Decade, DecadePartition};
pub use prior::{binomial_pmf, log_prior_penalty, PriorConfig};
pub use registry::{
    BayesMethod, ClusterMethod, IdentificationMethod, IdentifySettings, MethodRegistry, ResidualMethod, Session,
};
pub use residual::{residual_identify, residual_identify_cached, TieBreak};

use std::fmt;

use crate::error::{Error, Result};
use crate::forward::{validate_domain, MaterialParams, StressSeries};
use crate::solver::{FixedNProblem, PenaltySpec, StopReason};

/// Which pipeline produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodTag {
    Bayes,
    Cluster,
    Residual,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Bayes => "bayes",
            MethodTag::Cluster => "cluster",
            MethodTag::Residual => "residual",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the MAP criterion weighs its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiWeights {
    /// Weight `α` of `logg(n)`.
    pub prior_weight: f64,
    /// Also add the inner fit's weighted penalty, `2·α_Ω·Ω(x)`, so that `Φ`
    /// is twice the full functional `½‖F−σ^δ‖² + α_Ω Ω(x)` plus
    /// `α·logg(n)`.
    pub combined: bool,
}

impl Default for PhiWeights {
    fn default() -> Self {
        Self {
            prior_weight: 1.0,
            combined: false,
        }
    }
}

impl PhiWeights {
    pub fn new(prior_weight: f64, combined: bool) -> Result<Self> {
        if !(prior_weight.is_finite() && prior_weight >= 0.0) {
            return Err(Error::config(format!(
                "prior weight must be finite and non-negative, got {prior_weight}"
            )));
        }
        Ok(Self {
            prior_weight,
            combined,
        })
    }
}

/// `Φ(n | σ^δ)` for a parameter vector `x` with `n` elements.
///
/// `x` must lie in the admissible set for `n` and the problem's floor.
pub fn phi(problem: &FixedNProblem<'_>, x: &[f64], prior: &PriorConfig, weights: PhiWeights) -> Result<f64> {
    let n = problem.element_count();
    if !prior.candidates().contains(&n) {
        return Err(Error::config(format!("n={n} is not a candidate")));
    }
    let parts = problem.tikhonov_objective(x)?;
    let logg = prior.log_prior_penalty(n)?;
    Ok(phi_value(parts.misfit, parts.penalty, problem.penalty_spec(), logg, weights))
}

pub(crate) fn phi_value(misfit: f64, penalty: f64, spec: PenaltySpec, logg: f64, weights: PhiWeights) -> f64 {
    let mut value = 2.0 * misfit + weights.prior_weight * logg;
    if weights.combined {
        value += 2.0 * spec.weight() * penalty;
    }
    value
}

/// Outcome of the inner fit for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateStatus {
    Fitted {
        stop: StopReason,
        iterations: usize,
        start_index: usize,
    },
    Failed(String),
}

/// One row of an identification trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTrace {
    pub n: usize,
    /// `½‖F_n(x_n) − σ^δ‖²`, infinite for failed fits.
    pub misfit: f64,
    /// `logg(n)`; only the MAP pipeline evaluates it.
    pub logg: Option<f64>,
    /// Unweighted `Ω(x_n)`.
    pub penalty: f64,
    /// `Φ(n)`; only the MAP pipeline evaluates it.
    pub phi: Option<f64>,
    pub status: CandidateStatus,
    /// Fitted parameters, when the fit succeeded.
    pub params: Option<MaterialParams>,
}

impl CandidateTrace {
    pub fn is_fitted(&self) -> bool {
        matches!(self.status, CandidateStatus::Fitted { .. })
    }
}

/// Selected model together with the evidence that led to it.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub method: MethodTag,
    pub n: usize,
    /// Canonically ordered.
    pub params: MaterialParams,
    /// `½‖F_n(x) − σ^δ‖²` of the returned parameters.
    pub misfit: f64,
    /// Candidates in the order they were examined.
    pub trace: Vec<CandidateTrace>,
    /// Clustering input, for the cluster pipeline.
    pub unclustered: Option<MaterialParams>,
    pub notes: Vec<String>,
}

impl IdentificationResult {
    pub fn residual_norm(&self) -> f64 {
        (2.0 * self.misfit).sqrt()
    }

    /// Trace row of the chosen count, if it was a candidate.
    pub fn chosen_trace(&self) -> Option<&CandidateTrace> {
        self.trace.iter().find(|c| c.n == self.n && c.is_fitted())
    }
}

/// Panics in debug builds if a pipeline returns parameters outside `D(F_n)`.
fn debug_check(result: &IdentificationResult, gamma: f64) {
    debug_assert!(validate_domain(result.n, result.params.as_slice(), gamma).is_valid());
}

/// `½‖F_n(x) − σ^δ‖²` for a canonical parameter set.
fn misfit_of(cache: &FitCache<'_>, params: &MaterialParams) -> Result<f64> {
    let model = cache.model();
    let fitted = model.evaluate(params, cache.data().times())?;
    Ok(0.5 * squared_distance(&fitted, cache.data()))
}

fn squared_distance(a: &StressSeries, b: &StressSeries) -> f64 {
    let w = b.quadrature_weight();
    w * a
        .stress()
        .iter()
        .zip(b.stress())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
}

/// `‖σ^δ‖²`, the scale of round-off in misfit comparisons.
fn data_energy(data: &StressSeries) -> f64 {
    data.quadrature_weight() * data.stress().iter().map(|s| s * s).sum::<f64>()
}

/// Whether `new` beats `old` by more than accumulated round-off.
fn improves(new: f64, old: f64, energy: f64) -> bool {
    if !old.is_finite() {
        return new.is_finite();
    }
    new < old - round_off(new, old, energy)
}

fn round_off(a: f64, b: f64, energy: f64) -> f64 {
    1e-12 * a.abs().max(b.abs()) + 1e-16 * energy
}

fn trace_row(
    cache: &mut FitCache<'_>,
    n: usize,
    prior: Option<(&PriorConfig, PhiWeights)>,
) -> Result<CandidateTrace> {
    let logg = prior.map(|(p, _)| p.log_prior_penalty(n)).transpose()?;
    let spec = cache.penalty();
    Ok(match cache.fit(n) {
        Ok(fit) => CandidateTrace {
            n,
            misfit: fit.misfit,
            logg,
            penalty: fit.penalty,
            phi: prior.map(|(_, w)| phi_value(fit.misfit, fit.penalty, spec, logg.unwrap_or(0.0), w)),
            status: CandidateStatus::Fitted {
                stop: fit.stop,
                iterations: fit.iterations,
                start_index: fit.start_index,
            },
            params: Some(fit.params.clone()),
        },
        Err(message) => CandidateTrace {
            n,
            misfit: f64::INFINITY,
            logg,
            penalty: f64::NAN,
            phi: prior.map(|_| f64::INFINITY),
            status: CandidateStatus::Failed(message),
            params: None,
        },
    })
}
