use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{FixedNProblem, ObjectiveParts, SolverConfig};

/// Why a single descent ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// Residual norm reached `ζ δ`.
    Discrepancy,
    Gradient,
    /// Accepted step below tolerance, or no decreasing step could be found.
    Step,
    MaxIter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Discrepancy => "discrepancy",
            StopReason::Gradient => "gradient",
            StopReason::Step => "step",
            StopReason::MaxIter => "max_iter",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one projected Levenberg–Marquardt descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LmRun {
    /// Final iterate, in the order the descent produced it.
    pub x: Vec<f64>,
    pub parts: ObjectiveParts,
    /// Number of Jacobian evaluations.
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective at the start point and after every accepted step.
    pub history: Vec<f64>,
}

const MAX_DAMPING: f64 = 1e16;
const MIN_DAMPING: f64 = 1e-15;

fn project(x: &mut [f64], lower: &[f64]) {
    for (v, lo) in x.iter_mut().zip(lower) {
        if v.is_nan() || *v < *lo {
            *v = *lo;
        }
    }
}

/// Solves `(H_ff + λ diag(H_ff)) δ_f = −g_f` over the free coordinates.
fn damped_step(jtj: &DMatrix<f64>, jtr: &DVector<f64>, free: &[usize], damping: f64) -> Option<Vec<f64>> {
    let m = free.len();
    let max_diag = free.iter().map(|&k| jtj[(k, k)]).fold(0.0, f64::max);
    let floor = if max_diag > 0.0 { 1e-12 * max_diag } else { 1.0 };
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (i, &ki) in free.iter().enumerate() {
        for (j, &kj) in free.iter().enumerate() {
            a[(i, j)] = jtj[(ki, kj)];
        }
        a[(i, i)] += damping * jtj[(ki, ki)].max(floor);
        b[i] = -jtr[ki];
    }
    let solution = a.cholesky()?.solve(&b);
    solution.iter().all(|v| v.is_finite()).then(|| solution.as_slice().to_vec())
}

/// Runs one projected LM descent from `start`.
///
/// Coordinates sitting on their lower bound with the gradient pushing
/// outward are frozen for the step; every trial point is projected back onto
/// the box. A trial is accepted only if it lowers the objective, so
/// `history` is non-increasing.
pub(crate) fn descend(
    problem: &FixedNProblem<'_>,
    start: &[f64],
    cfg: &SolverConfig,
    noise_delta: f64,
) -> LmRun {
    let lower = problem.lower_bounds();
    let mut x = start.to_vec();
    project(&mut x, &lower);
    let threshold = cfg.zeta * noise_delta;
    let reached = |parts: &ObjectiveParts| noise_delta > 0.0 && parts.residual_norm() <= threshold;

    let mut parts = problem.objective_unchecked(&x);
    let mut history = vec![parts.objective];
    let mut damping = cfg.damping_initial;
    let mut iterations = 0;

    if reached(&parts) {
        return LmRun { x, parts, iterations, stop: StopReason::Discrepancy, history };
    }
    let stop = loop {
        if iterations >= cfg.max_iterations {
            break StopReason::MaxIter;
        }
        iterations += 1;
        // `parts` stays the objective_unchecked value so history compares like with like
        let (jtj, jtr, _) = problem.normal_equations(&x);

        let free: Vec<usize> = (0..x.len())
            .filter(|&k| x[k] > lower[k] || jtr[k] < 0.0)
            .collect();
        let projected_gradient = free.iter().map(|&k| jtr[k].abs()).fold(0.0, f64::max);
        if free.is_empty() || projected_gradient <= cfg.gradient_tol * (1.0 + parts.objective) {
            break StopReason::Gradient;
        }

        let mut accepted = None;
        while damping <= MAX_DAMPING {
            if let Some(step) = damped_step(&jtj, &jtr, &free, damping) {
                let mut trial = x.clone();
                for (&k, d) in free.iter().zip(&step) {
                    trial[k] += d;
                }
                project(&mut trial, &lower);
                let trial_parts = problem.objective_unchecked(&trial);
                if trial_parts.objective.is_finite() && trial_parts.objective < parts.objective {
                    damping = (damping / cfg.damping_factor).max(MIN_DAMPING);
                    accepted = Some((trial, trial_parts));
                    break;
                }
            }
            damping *= cfg.damping_factor;
        }
        let Some((trial, trial_parts)) = accepted else {
            break StopReason::Step;
        };

        let step_norm = trial
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = trial;
        parts = trial_parts;
        history.push(parts.objective);
        if reached(&parts) {
            break StopReason::Discrepancy;
        }
        if step_norm <= cfg.step_tol * (x_norm + cfg.step_tol) {
            break StopReason::Step;
        }
    };
    LmRun { x, parts, iterations, stop, history }
}
