use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lm::{descend, LmRun, StopReason};
use super::{FixedNProblem, PenaltySpec, SolverConfig};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, MaterialParams, StressSeries};

/// Best descent of a multistart fit at fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub n: usize,
    /// Minimizer, canonically ordered.
    pub params: MaterialParams,
    /// `½‖F_n(x) − σ^δ‖²`
    pub misfit: f64,
    /// Unweighted `Ω(x)`.
    pub penalty: f64,
    pub penalty_spec: PenaltySpec,
    /// `misfit + α Ω(x)`
    pub objective: f64,
    pub iterations: usize,
    /// Index of the winning start.
    pub start_index: usize,
    pub stop: StopReason,
    /// Every start's descent, in start order.
    pub runs: Vec<LmRun>,
}

impl FitResult {
    /// `‖F_n(x) − σ^δ‖`
    pub fn residual_norm(&self) -> f64 {
        (2.0 * self.misfit).sqrt()
    }
}

/// Deterministic initial points for `n` elements.
///
/// Stiffnesses are drawn uniformly from the configured range. Relaxation
/// times are stratified on a log scale over `[γ, T]`: element `j` gets a
/// jittered position inside the `j`-th of `n` equal log-width strata.
pub fn start_points(n: usize, model: &ForwardModel, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (lo, hi) = cfg.stiffness_start_range;
    let log_lo = model.gamma().ln();
    let log_hi = model.program().horizon().ln();
    (0..cfg.multistarts)
        .map(|_| {
            let mut x = Vec::with_capacity(2 * n + 1);
            x.push(rng.random_range(lo..hi));
            for j in 0..n {
                let u: f64 = rng.random();
                let pos = (j as f64 + u) / n as f64;
                x.push(rng.random_range(lo..hi));
                x.push((log_lo + pos * (log_hi - log_lo)).exp().max(model.gamma()));
            }
            x
        })
        .collect()
}

/// Starts for an `n + 1` element fit derived from an `n` element solution.
///
/// Each element of `fit` is split in turn into two halves with relaxation
/// times a factor 1.5 apart. Three more starts append a tiny element at
/// `horizon`, `10·horizon` and `100·horizon`; such slow elements trade off
/// against the base spring and are out of reach of the generated starts.
pub fn nested_starts(fit: &MaterialParams, horizon: f64, gamma: f64) -> Vec<Vec<f64>> {
    let elements: Vec<(f64, f64)> = fit.elements().collect();
    let mu = fit.base_stiffness();
    let flatten = |list: &[(f64, f64)]| {
        let mut x = Vec::with_capacity(2 * list.len() + 1);
        x.push(mu);
        for &(m, t) in list {
            x.push(m);
            x.push(t.max(gamma));
        }
        x
    };
    let mut starts = Vec::with_capacity(elements.len() + 3);
    for j in 0..elements.len() {
        let (m, t) = elements[j];
        let mut list = elements.clone();
        list[j] = (0.5 * m, t / 1.5);
        list.insert(j + 1, (0.5 * m, t * 1.5));
        starts.push(flatten(&list));
    }
    let scale = elements.iter().map(|e| e.0).sum::<f64>().max(mu).max(1.0);
    for factor in [1.0, 10.0, 100.0] {
        let mut list = elements.clone();
        list.push((1e-3 * scale, factor * horizon));
        starts.push(flatten(&list));
    }
    starts
}

/// Fits `n` elements to `data` by multistart projected Levenberg–Marquardt.
///
/// Each start stops early once `‖F_n(x) − σ^δ‖ ≤ ζ·noise_delta`; passing
/// `noise_delta = 0` disables that rule. The start with the lowest objective
/// wins, ties going to the lowest start index.
pub fn minimize_fixed_n(
    model: &ForwardModel,
    n: usize,
    data: &StressSeries,
    penalty: PenaltySpec,
    cfg: &SolverConfig,
    noise_delta: f64,
) -> Result<FitResult> {
    minimize_fixed_n_from(model, n, data, penalty, cfg, noise_delta, &[])
}

/// [`minimize_fixed_n`] with caller-supplied starts run after the generated
/// ones. Every extra start must have length `2n + 1`.
pub fn minimize_fixed_n_from(
    model: &ForwardModel,
    n: usize,
    data: &StressSeries,
    penalty: PenaltySpec,
    cfg: &SolverConfig,
    noise_delta: f64,
    extra_starts: &[Vec<f64>],
) -> Result<FitResult> {
    cfg.validate()?;
    if let Some(bad) = extra_starts.iter().find(|s| s.len() != 2 * n + 1 || s.iter().any(|v| !v.is_finite())) {
        return Err(Error::config(format!(
            "extra start of length {} does not fit n={n}",
            bad.len()
        )));
    }
    if !(noise_delta.is_finite() && noise_delta >= 0.0) {
        return Err(Error::config(format!(
            "noise level must be finite and non-negative, got {noise_delta}"
        )));
    }
    for &t in data.times() {
        model.program().check_time(t)?;
    }
    let problem = FixedNProblem::new(*model, data, n, penalty);
    let mut starts = start_points(n, model, cfg);
    starts.extend(extra_starts.iter().cloned());
    let runs: Vec<LmRun> = starts
        .iter()
        .map(|start| descend(&problem, start, cfg, noise_delta))
        .collect();

    let (start_index, best) = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.parts.objective.is_finite())
        .min_by(|(ia, a), (ib, b)| {
            a.parts
                .objective
                .total_cmp(&b.parts.objective)
                .then(ia.cmp(ib))
        })
        .ok_or_else(|| Error::Solver(format!("no start produced a finite objective for n={n}")))?;

    let params = MaterialParams::from_vector_unchecked(best.x.clone());
    Ok(FitResult {
        n,
        misfit: best.parts.misfit,
        penalty: best.parts.penalty,
        penalty_spec: penalty,
        objective: best.parts.objective,
        iterations: best.iterations,
        start_index,
        stop: best.stop,
        params,
        runs,
    })
}
