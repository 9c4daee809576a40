use super::{data_energy, debug_check, improves, trace_row, CandidateTrace, FitCache, IdentificationResult, MethodTag, PhiWeights, PriorConfig};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, StressSeries};
use crate::solver::{PenaltySpec, SolverConfig};

/// MAP model selection with a fresh fit cache.
///
/// `noise_delta > 0` enables the discrepancy stop inside every fit.
pub fn bayes_identify(
    model: &ForwardModel,
    data: &StressSeries,
    prior: &PriorConfig,
    weights: PhiWeights,
    penalty: PenaltySpec,
    solver: &SolverConfig,
    noise_delta: f64,
) -> Result<IdentificationResult> {
    let mut cache = FitCache::new(*model, data, penalty, solver.clone(), noise_delta)?;
    bayes_identify_cached(&mut cache, prior, weights)
}

/// Greedy MAP search over `prior.candidates()`.
///
/// Starting from the smallest candidate, the next larger candidates are
/// scanned in order and the first one with a lower `Φ` becomes current; the
/// search ends when no larger candidate improves. Failed fits count as
/// `Φ = ∞`. The trace lists candidates in the order they were probed.
pub fn bayes_identify_cached(
    cache: &mut FitCache<'_>,
    prior: &PriorConfig,
    weights: PhiWeights,
) -> Result<IdentificationResult> {
    let candidates = prior.candidates();
    let energy = data_energy(cache.data());
    let mut trace: Vec<CandidateTrace> = Vec::new();
    let probe = |cache: &mut FitCache<'_>, trace: &mut Vec<CandidateTrace>, n: usize| -> Result<f64> {
        if let Some(row) = trace.iter().find(|r| r.n == n) {
            return Ok(row.phi.unwrap_or(f64::INFINITY));
        }
        let row = trace_row(cache, n, Some((prior, weights)))?;
        let value = row.phi.unwrap_or(f64::INFINITY);
        trace.push(row);
        Ok(value)
    };

    let mut k = 0;
    let mut current = probe(cache, &mut trace, candidates[0])?;
    'search: loop {
        for (j, &n) in candidates.iter().enumerate().skip(k + 1) {
            let value = probe(cache, &mut trace, n)?;
            if improves(value, current, energy) {
                k = j;
                current = value;
                continue 'search;
            }
        }
        break;
    }
    if !current.is_finite() {
        return Err(Error::Pipeline(format!(
            "every probed candidate fit failed: {}",
            failures(&trace)
        )));
    }

    let n = candidates[k];
    let chosen = trace.iter().find(|r| r.n == n).expect("chosen candidate was probed");
    let mut notes = vec![format!(
        "q={} alpha={} combined={} probed {} of {} candidates",
        prior.q(),
        weights.prior_weight,
        weights.combined,
        trace.len(),
        candidates.len()
    )];
    for row in trace.iter().filter(|r| !r.is_fitted()) {
        notes.push(format!("fit for n={} failed", row.n));
    }
    let result = IdentificationResult {
        method: MethodTag::Bayes,
        n,
        params: chosen.params.clone().expect("finite phi implies a fit"),
        misfit: chosen.misfit,
        trace,
        unclustered: None,
        notes,
    };
    debug_check(&result, cache.model().gamma());
    Ok(result)
}

pub(super) fn failures(trace: &[CandidateTrace]) -> String {
    trace
        .iter()
        .filter_map(|r| match &r.status {
            super::CandidateStatus::Failed(m) => Some(format!("n={}: {m}", r.n)),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("; ")
}
