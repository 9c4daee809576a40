use std::fmt;
use std::str::FromStr;

use super::bayes::failures;
use super::{data_energy, debug_check, round_off, trace_row, FitCache, IdentificationResult, MethodTag};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, StressSeries};
use crate::solver::{PenaltySpec, SolverConfig};

/// Which count wins when several candidates reach the same misfit up to
/// round-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieBreak {
    /// The largest tied count. A larger model that only reproduces a
    /// smaller one (a zero-stiffness or duplicated element) still counts as
    /// the minimizer.
    #[default]
    Larger,
    Smaller,
}

impl TieBreak {
    pub fn as_str(&self) -> &'static str {
        match self {
            TieBreak::Larger => "larger",
            TieBreak::Smaller => "smaller",
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "larger" => Ok(TieBreak::Larger),
            "smaller" => Ok(TieBreak::Smaller),
            other => Err(Error::Config(format!(
                "unknown tie break {other:?} (expected larger or smaller)"
            ))),
        }
    }
}

/// Residual sweep with unpenalized fits and a fresh cache.
pub fn residual_identify(
    model: &ForwardModel,
    data: &StressSeries,
    candidates: &[usize],
    solver: &SolverConfig,
    noise_delta: f64,
    ties: TieBreak,
) -> Result<IdentificationResult> {
    let mut cache = FitCache::new(*model, data, PenaltySpec::none(), solver.clone(), noise_delta)?;
    residual_identify_cached(&mut cache, candidates, ties)
}

/// Fits every candidate and returns the one with the smallest misfit.
///
/// The cache should carry no penalty; its fits are used as they are.
pub fn residual_identify_cached(
    cache: &mut FitCache<'_>,
    candidates: &[usize],
    ties: TieBreak,
) -> Result<IdentificationResult> {
    if candidates.is_empty() {
        return Err(Error::Config("candidate set must not be empty".into()));
    }
    let mut trace = Vec::with_capacity(candidates.len());
    for &n in candidates {
        trace.push(trace_row(cache, n, None)?);
    }
    let best = trace
        .iter()
        .filter(|r| r.is_fitted())
        .map(|r| r.misfit)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Pipeline(format!(
            "every candidate fit failed: {}",
            failures(&trace)
        )));
    }
    let energy = data_energy(cache.data());
    let tied = trace
        .iter()
        .filter(|r| r.is_fitted() && r.misfit - best <= round_off(r.misfit, best, energy));
    let chosen = match ties {
        TieBreak::Larger => tied.max_by_key(|r| r.n),
        TieBreak::Smaller => tied.min_by_key(|r| r.n),
    }
    .expect("the minimizer itself is tied");
    let (n, params, misfit) = (chosen.n, chosen.params.clone().expect("fitted row"), chosen.misfit);

    let mut notes = vec![format!("ties={ties}")];
    for row in trace.iter().filter(|r| !r.is_fitted()) {
        notes.push(format!("fit for n={} failed", row.n));
    }
    let result = IdentificationResult {
        method: MethodTag::Residual,
        n,
        params,
        misfit,
        trace,
        unclustered: None,
        notes,
    };
    debug_check(&result, cache.model().gamma());
    Ok(result)
}
