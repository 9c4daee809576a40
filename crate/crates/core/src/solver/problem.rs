use nalgebra::{DMatrix, DVector};

use super::{PenaltyKind, PenaltySpec};
use crate::error::{Error, Result};
use crate::forward::{validate_domain, ElementKernel, ForwardModel, StressSeries};

/// Tikhonov functional `½‖F_n(x) − σ^δ‖² + α Ω(x)` for a fixed element
/// count, with residuals weighted by `√Δt` so that `‖r‖²` approximates the
/// L²(0, T) norm.
#[derive(Debug, Clone)]
pub struct FixedNProblem<'a> {
    model: ForwardModel,
    data: &'a StressSeries,
    n: usize,
    penalty: PenaltySpec,
    sqrt_weight: f64,
}

/// Misfit and penalty parts of the objective at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    /// `½‖r‖²`
    pub misfit: f64,
    /// `Ω(x)`, unweighted.
    pub penalty: f64,
    /// `misfit + α Ω(x)`
    pub objective: f64,
}

impl ObjectiveParts {
    /// `‖r‖`, the quantity compared against the discrepancy threshold.
    pub fn residual_norm(&self) -> f64 {
        (2.0 * self.misfit).sqrt()
    }
}

impl<'a> FixedNProblem<'a> {
    pub fn new(model: ForwardModel, data: &'a StressSeries, n: usize, penalty: PenaltySpec) -> Self {
        Self {
            model,
            data,
            n,
            penalty,
            sqrt_weight: data.quadrature_weight().sqrt(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        2 * self.n + 1
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn data(&self) -> &StressSeries {
        self.data
    }

    pub fn penalty_spec(&self) -> PenaltySpec {
        self.penalty
    }

    /// Lower bounds of the feasible box: zero for stiffnesses, `γ` for
    /// relaxation times.
    pub fn lower_bounds(&self) -> Vec<f64> {
        (0..self.dimension())
            .map(|k| if k > 0 && k % 2 == 0 { self.model.gamma() } else { 0.0 })
            .collect()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        let report = validate_domain(self.n, x, self.model.gamma());
        if x.len() != self.dimension() || !report.is_valid() {
            let detail: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::domain(format!(
                "parameters outside the admissible set for n={}: {}",
                self.n,
                if detail.is_empty() {
                    format!("length {} != {}", x.len(), self.dimension())
                } else {
                    detail.join("; ")
                }
            )));
        }
        Ok(())
    }

    /// `rᵢ = √Δt (F_n(x)(tᵢ) − σ^δ(tᵢ))`.
    pub fn residual_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self.residuals_unchecked(x))
    }

    pub(crate) fn residuals_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let kernels = self.kernels(x);
        self.data
            .times()
            .iter()
            .zip(self.data.stress())
            .map(|(&t, &s)| {
                let value = kernels
                    .iter()
                    .fold(x[0] * self.model.spring_sensitivity(t), |acc, k| acc + k.value(t));
                self.sqrt_weight * (value - s)
            })
            .collect()
    }

    fn kernels(&self, x: &[f64]) -> Vec<ElementKernel> {
        x[1..]
            .chunks_exact(2)
            .map(|pair| self.model.kernel(pair[0], pair[1]))
            .collect()
    }

    /// Analytic Jacobian of [`residual_vector`](Self::residual_vector), one
    /// row per sample and one column per entry of `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let p = self.dimension();
        let times = self.data.times();
        let mut jac = DMatrix::zeros(times.len(), p);
        let mut row = vec![0.0; p];
        let kernels = self.kernels(x);
        for (i, &t) in times.iter().enumerate() {
            self.fill_row(x[0], &kernels, t, &mut row);
            for (k, v) in row.iter().enumerate() {
                jac[(i, k)] = self.sqrt_weight * v;
            }
        }
        Ok(jac)
    }

    /// Unweighted sensitivities `∂F_n(x)(t)/∂x` and the model value at `t`.
    fn fill_row(&self, spring: f64, kernels: &[ElementKernel], t: f64, row: &mut [f64]) -> f64 {
        row[0] = self.model.spring_sensitivity(t);
        let mut value = spring * row[0];
        for (j, kernel) in kernels.iter().enumerate() {
            let r = kernel.response(t);
            row[1 + 2 * j] = r.d_stiffness;
            row[2 + 2 * j] = r.d_relaxation_time;
            value += r.value;
        }
        value
    }

    /// Index of the relaxation time `Ω₂` acts on: the smallest one.
    fn smallest_tau_index(&self, x: &[f64]) -> Option<usize> {
        (0..self.n)
            .map(|j| 2 + 2 * j)
            .min_by(|&a, &b| x[a].total_cmp(&x[b]))
    }

    /// Unweighted penalty `Ω(x)`.
    pub fn penalty_value(&self, x: &[f64]) -> f64 {
        match self.penalty.kind() {
            PenaltyKind::None => 0.0,
            PenaltyKind::FullNorm => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            PenaltyKind::Tau1Only => self
                .smallest_tau_index(x)
                .map_or(0.0, |k| 0.5 * x[k] * x[k]),
        }
    }

    pub fn tikhonov_objective(&self, x: &[f64]) -> Result<ObjectiveParts> {
        self.check(x)?;
        Ok(self.objective_unchecked(x))
    }

    pub(crate) fn objective_unchecked(&self, x: &[f64]) -> ObjectiveParts {
        let misfit = 0.5
            * self
                .residuals_unchecked(x)
                .iter()
                .map(|r| r * r)
                .sum::<f64>();
        let penalty = self.penalty_value(x);
        ObjectiveParts {
            misfit,
            penalty,
            objective: misfit + self.penalty.weight() * penalty,
        }
    }

    /// Gauss–Newton normal equations `JᵀJ` and `Jᵀr` of the augmented
    /// least-squares system (data rows plus `√α`-scaled penalty rows),
    /// accumulated without storing the Jacobian.
    pub(crate) fn normal_equations(&self, x: &[f64]) -> (DMatrix<f64>, DVector<f64>, ObjectiveParts) {
        let p = self.dimension();
        let kernels = self.kernels(x);
        // upper triangle of JᵀJ, row-major
        let mut upper = vec![0.0; p * p];
        let mut jtr = DVector::<f64>::zeros(p);
        let mut row = vec![0.0; p];
        let mut sum_sq = 0.0;
        for (&t, &s) in self.data.times().iter().zip(self.data.stress()) {
            let value = self.fill_row(x[0], &kernels, t, &mut row);
            let r = value - s;
            sum_sq += r * r;
            for a in 0..p {
                let ra = row[a];
                jtr[a] += ra * r;
                let dst = &mut upper[a * p + a..(a + 1) * p];
                for (d, rb) in dst.iter_mut().zip(&row[a..]) {
                    *d += ra * rb;
                }
            }
        }
        let weight = self.sqrt_weight * self.sqrt_weight;
        sum_sq *= weight;
        jtr *= weight;
        let mut jtj = DMatrix::<f64>::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                jtj[(a, b)] = weight * upper[a * p + b];
            }
        }
        let alpha = self.penalty.weight();
        let penalty = self.penalty_value(x);
        if alpha > 0.0 {
            match self.penalty.kind() {
                PenaltyKind::None => {}
                PenaltyKind::FullNorm => {
                    for k in 0..p {
                        jtj[(k, k)] += alpha;
                        jtr[k] += alpha * x[k];
                    }
                }
                PenaltyKind::Tau1Only => {
                    if let Some(k) = self.smallest_tau_index(x) {
                        jtj[(k, k)] += alpha;
                        jtr[k] += alpha * x[k];
                    }
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                jtj[(a, b)] = jtj[(b, a)];
            }
        }
        let misfit = 0.5 * sum_sq;
        (
            jtj,
            jtr,
            ObjectiveParts {
                misfit,
                penalty,
                objective: misfit + alpha * penalty,
            },
        )
    }
}
