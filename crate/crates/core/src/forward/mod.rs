//! Closed-form stress response of a generalized Maxwell solid under a
//! ramp-and-hold strain program.
//!
//! The model is a lone spring of stiffness `μ` in parallel with `n` Maxwell
//! elements `(μⱼ, τⱼ)`. Each element's inelastic strain follows
//! `ε̇ⁱ = (ε − εⁱ) / (τ/2)`, which for the ramp-and-hold program integrates in
//! closed form:
//!
//! ```text
//! ramp  (t ≤ ε̄/ε̇):  σⱼ(t) = (μⱼ τⱼ ε̇ / 2) · (1 − e^(−2t/τⱼ))
//! hold  (t > ε̄/ε̇):  σⱼ(t) = (μⱼ τⱼ ε̇ / 2) · (e^(−2(t − ε̄/ε̇)/τⱼ) − e^(−2t/τⱼ))
//! ```
//!
//! Strains are carried in percent, so `ε̄ = 20` is a 20 % stretch and
//! stresses come out in MPa·%.

mod domain;
mod oracle;
mod probe;

pub use domain::{validate_domain, DomainReport, Violation};
pub use oracle::OdeOracle;
pub use probe::{illposedness_probe, ProbeReport, ProbeStep};

use crate::error::{Error, Result};

/// Lower bound on every relaxation time unless configured otherwise.
pub const DEFAULT_GAMMA: f64 = 0.01;

/// Ramp-and-hold strain schedule: strain rises at `strain_rate` until it
/// reaches `max_strain`, then stays there until `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainProgram {
    strain_rate: f64,
    max_strain: f64,
    horizon: f64,
}

impl StrainProgram {
    pub fn new(strain_rate: f64, max_strain: f64, horizon: f64) -> Result<Self> {
        for (name, v) in [
            ("strain rate", strain_rate),
            ("maximum strain", max_strain),
            ("horizon", horizon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if max_strain / strain_rate >= horizon {
            return Err(Error::domain(format!(
                "ramp ends at t={} which is not before the horizon {horizon}",
                max_strain / strain_rate
            )));
        }
        Ok(Self {
            strain_rate,
            max_strain,
            horizon,
        })
    }

    pub fn strain_rate(&self) -> f64 {
        self.strain_rate
    }

    pub fn max_strain(&self) -> f64 {
        self.max_strain
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time at which the ramp reaches the maximum strain.
    pub fn ramp_end(&self) -> f64 {
        self.max_strain / self.strain_rate
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )))
        }
    }

    pub fn strain_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.strain_unchecked(t))
    }

    pub(crate) fn strain_unchecked(&self, t: f64) -> f64 {
        if t <= self.ramp_end() {
            self.strain_rate * t
        } else {
            self.max_strain
        }
    }
}

/// Element count plus the flat parameter vector `(μ, μ₁, τ₁, …, μₙ, τₙ)`.
///
/// Elements are kept in canonical order, ascending in relaxation time (ties
/// broken by stiffness), so two parameter sets describing the same model
/// compare and evaluate identically.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    values: Vec<f64>,
}

impl MaterialParams {
    /// Builds a parameter set from the base stiffness and `(μⱼ, τⱼ)` pairs.
    pub fn new(base_stiffness: f64, elements: &[(f64, f64)]) -> Result<Self> {
        let mut values = Vec::with_capacity(1 + 2 * elements.len());
        values.push(base_stiffness);
        for &(mu, tau) in elements {
            values.push(mu);
            values.push(tau);
        }
        Self::from_vector(elements.len(), values)
    }

    /// Builds a parameter set from an element count and its flat vector.
    /// The vector must have length exactly `2n + 1`.
    pub fn from_vector(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * n + 1 {
            return Err(Error::domain(format!(
                "parameter vector for {n} elements needs {} entries, got {}",
                2 * n + 1,
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::domain(format!(
                "parameter {i} must be finite and non-negative, got {v}"
            )));
        }
        if let Some(j) = (0..n).find(|j| values[2 + 2 * j] <= 0.0) {
            return Err(Error::domain(format!(
                "relaxation time of element {} must be positive",
                j + 1
            )));
        }
        let mut params = Self { values };
        params.canonicalize();
        Ok(params)
    }

    pub(crate) fn from_vector_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() % 2 == 1);
        let mut params = Self { values };
        params.canonicalize();
        params
    }

    pub fn element_count(&self) -> usize {
        self.values.len() / 2
    }

    pub fn base_stiffness(&self) -> f64 {
        self.values[0]
    }

    /// `(μⱼ, τⱼ)` pairs in canonical order.
    pub fn elements(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.values[1..].chunks_exact(2).map(|c| (c[0], c[1]))
    }

    pub fn relaxation_times(&self) -> Vec<f64> {
        self.elements().map(|(_, tau)| tau).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Re-sorts the elements ascending in relaxation time.
    pub fn canonicalize(&mut self) {
        let mut pairs: Vec<(f64, f64)> = self.elements().collect();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        for (j, (mu, tau)) in pairs.into_iter().enumerate() {
            self.values[1 + 2 * j] = mu;
            self.values[2 + 2 * j] = tau;
        }
    }

    /// Squared Euclidean norm of the active `2n + 1` entries.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Time grid plus stress samples, optionally carrying a record of the noise
/// that was injected into them.
#[derive(Debug, Clone, PartialEq)]
pub struct StressSeries {
    times: Vec<f64>,
    stress: Vec<f64>,
    noise: Option<NoiseRecord>,
}

/// Provenance of synthetic noise: what was requested, what was achieved and
/// how to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecord {
    pub target_delta_rel: f64,
    pub achieved_delta_rel: f64,
    /// Absolute noise level `‖σ − σ^δ‖` in the discrete L² norm.
    pub delta_abs: f64,
    pub seed: u64,
    pub generator: String,
}

/// Relative tolerance on the spacing of a uniform grid.
pub const GRID_UNIFORMITY_TOL: f64 = 1e-12;

impl StressSeries {
    pub fn new(times: Vec<f64>, stress: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySeries);
        }
        if times.len() != stress.len() {
            return Err(Error::GridMismatch(format!(
                "{} time points but {} stress samples",
                times.len(),
                stress.len()
            )));
        }
        check_grid(&times)?;
        if let Some(v) = stress.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite stress sample {v}")));
        }
        Ok(Self {
            times,
            stress,
            noise: None,
        })
    }

    pub fn with_noise(mut self, record: NoiseRecord) -> Self {
        self.noise = Some(record);
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn stress(&self) -> &[f64] {
        &self.stress
    }

    pub fn noise(&self) -> Option<&NoiseRecord> {
        self.noise.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Grid spacing; zero for a single-sample series.
    pub fn dt(&self) -> f64 {
        grid_spacing(&self.times)
    }

    /// Weight of each sample in the discrete L² norm: the grid spacing, or
    /// one for a single sample.
    pub fn quadrature_weight(&self) -> f64 {
        quadrature_weight(&self.times)
    }

    /// Discrete L² norm `(Δt Σ σᵢ²)^½`.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.stress, self.quadrature_weight())
    }

    /// Replaces the samples while keeping the grid.
    pub(crate) fn with_stress(&self, stress: Vec<f64>) -> Self {
        debug_assert_eq!(stress.len(), self.times.len());
        Self {
            times: self.times.clone(),
            stress,
            noise: None,
        }
    }
}

pub(crate) fn grid_spacing(times: &[f64]) -> f64 {
    match times {
        [] | [_] => 0.0,
        [first, .., last] => (last - first) / (times.len() - 1) as f64,
    }
}

pub(crate) fn quadrature_weight(times: &[f64]) -> f64 {
    if times.len() < 2 {
        1.0
    } else {
        grid_spacing(times)
    }
}

/// Checks that `times` is strictly increasing and uniformly spaced.
pub fn check_grid(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::domain(format!("non-finite time {t}")));
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!(
            "time grid not strictly increasing at index {}",
            i + 1
        )));
    }
    if times.len() > 2 {
        let dt = grid_spacing(times);
        let span = times[times.len() - 1] - times[0];
        let tol = GRID_UNIFORMITY_TOL * span.max(dt);
        if let Some(i) = times
            .iter()
            .enumerate()
            .position(|(i, t)| (t - (times[0] + i as f64 * dt)).abs() > tol)
        {
            return Err(Error::domain(format!(
                "time grid not uniform at index {i}"
            )));
        }
    }
    Ok(())
}

/// Discrete L² norm with a constant quadrature weight.
pub fn l2_norm(values: &[f64], weight: f64) -> f64 {
    (weight * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Stress of one Maxwell element and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ElementResponse {
    pub value: f64,
    pub d_stiffness: f64,
    pub d_relaxation_time: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ElementKernel {
    stiffness: f64,
    rate: f64,
    tau: f64,
    t1: f64,
    /// `1 − e^(−2t₁/τ)`, kept separate so the hold branch stays finite as
    /// `τ → γ`.
    ramp_rise: f64,
    ramp_decay: f64,
}

impl ElementKernel {
    pub(crate) fn value(&self, t: f64) -> f64 {
        let amplitude = 0.5 * self.stiffness * self.tau * self.rate;
        if t <= self.t1 {
            amplitude * -(-2.0 * t / self.tau).exp_m1()
        } else {
            amplitude * (-2.0 * (t - self.t1) / self.tau).exp() * self.ramp_rise
        }
    }

    /// Element stress together with `∂σ/∂μⱼ` and `∂σ/∂τⱼ`.
    pub(crate) fn response(&self, t: f64) -> ElementResponse {
        let half_rate_tau = 0.5 * self.rate * self.tau;
        let half_rate_mu = 0.5 * self.rate * self.stiffness;
        let tau = self.tau;
        if t <= self.t1 {
            let rise = -(-2.0 * t / tau).exp_m1();
            let decay = 1.0 - rise;
            ElementResponse {
                value: self.stiffness * half_rate_tau * rise,
                d_stiffness: half_rate_tau * rise,
                d_relaxation_time: half_rate_mu * (rise - 2.0 * t / tau * decay),
            }
        } else {
            let s = t - self.t1;
            let tail = (-2.0 * s / tau).exp();
            ElementResponse {
                value: self.stiffness * half_rate_tau * tail * self.ramp_rise,
                d_stiffness: half_rate_tau * tail * self.ramp_rise,
                d_relaxation_time: half_rate_mu
                    * tail
                    * (self.ramp_rise + 2.0 * s / tau * self.ramp_rise
                        - 2.0 * self.t1 / tau * self.ramp_decay),
            }
        }
    }
}

/// Evaluates the closed-form forward operator for a fixed strain program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardModel {
    program: StrainProgram,
    gamma: f64,
}

impl ForwardModel {
    pub fn new(program: StrainProgram, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain(format!(
                "relaxation-time floor must be positive, got {gamma}"
            )));
        }
        Ok(Self { program, gamma })
    }

    pub fn program(&self) -> &StrainProgram {
        &self.program
    }

    /// Relaxation-time floor `γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn stress_single_spring(&self, stiffness: f64, t: f64) -> Result<f64> {
        if !(stiffness.is_finite() && stiffness >= 0.0) {
            return Err(Error::domain(format!(
                "stiffness must be non-negative, got {stiffness}"
            )));
        }
        self.program.check_time(t)?;
        Ok(stiffness * self.program.strain_unchecked(t))
    }

    pub fn stress_element(&self, stiffness: f64, relaxation_time: f64, t: f64) -> Result<f64> {
        self.check_element(stiffness, relaxation_time)?;
        self.program.check_time(t)?;
        Ok(self.element_stress(stiffness, relaxation_time, t))
    }

    /// Total stress of `params` at a single time.
    pub fn stress_at(&self, params: &MaterialParams, t: f64) -> Result<f64> {
        self.check_params(params)?;
        self.program.check_time(t)?;
        Ok(self.total_stress(params.as_slice(), t))
    }

    /// Samples the total stress of `params` on `times`.
    pub fn evaluate(&self, params: &MaterialParams, times: &[f64]) -> Result<StressSeries> {
        self.check_params(params)?;
        for &t in times {
            self.program.check_time(t)?;
        }
        let x = params.as_slice();
        let stress = times.iter().map(|&t| self.total_stress(x, t)).collect();
        StressSeries::new(times.to_vec(), stress)
    }

    pub(crate) fn check_params(&self, params: &MaterialParams) -> Result<()> {
        params
            .elements()
            .try_for_each(|(mu, tau)| self.check_element(mu, tau))
    }

    fn check_element(&self, stiffness: f64, relaxation_time: f64) -> Result<()> {
        if !(stiffness.is_finite() && stiffness >= 0.0) {
            return Err(Error::domain(format!(
                "stiffness must be non-negative, got {stiffness}"
            )));
        }
        if !(relaxation_time.is_finite() && relaxation_time >= self.gamma) {
            return Err(Error::domain(format!(
                "relaxation time {relaxation_time} below floor {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Sum of the spring and every element in the order they appear in `x`.
    pub(crate) fn total_stress(&self, x: &[f64], t: f64) -> f64 {
        let mut sigma = x[0] * self.program.strain_unchecked(t);
        for pair in x[1..].chunks_exact(2) {
            sigma += self.element_stress(pair[0], pair[1], t);
        }
        sigma
    }

    pub(crate) fn element_stress(&self, stiffness: f64, relaxation_time: f64, t: f64) -> f64 {
        self.kernel(stiffness, relaxation_time).value(t)
    }

    /// Time-independent factors of one element, for evaluation on many
    /// samples.
    pub(crate) fn kernel(&self, stiffness: f64, relaxation_time: f64) -> ElementKernel {
        let tau = relaxation_time;
        let t1 = self.program.ramp_end();
        let ramp_rise = -(-2.0 * t1 / tau).exp_m1();
        ElementKernel {
            stiffness,
            rate: self.program.strain_rate,
            tau,
            t1,
            ramp_rise,
            ramp_decay: 1.0 - ramp_rise,
        }
    }

    /// `∂σ/∂μ` of the lone spring, i.e. the strain.
    pub(crate) fn spring_sensitivity(&self, t: f64) -> f64 {
        self.program.strain_unchecked(t)
    }
}

/// Uniform grid `0, Δt, 2Δt, …` up to and including `horizon` (to rounding).
pub fn uniform_grid(dt: f64, horizon: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config(format!("grid spacing must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::config(format!("horizon must be positive, got {horizon}")));
    }
    if dt > horizon {
        return Err(Error::config(format!(
            "grid spacing {dt} exceeds the horizon {horizon}"
        )));
    }
    let steps = (horizon / dt * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=steps)
        .map(|i| (i as f64 * dt).min(horizon))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_element() -> MaterialParams {
        MaterialParams::new(10.0, &[(4.0, 0.2), (7.0, 3.7), (1.0, 25.0)]).unwrap()
    }

    fn fast() -> ForwardModel {
        ForwardModel::new(StrainProgram::new(10.0, 20.0, 100.0).unwrap(), DEFAULT_GAMMA).unwrap()
    }

    #[test]
    fn spring_ramp_and_hold() {
        let m = fast();
        assert_eq!(m.stress_single_spring(10.0, 2.0).unwrap(), 200.0);
        assert_eq!(m.stress_single_spring(10.0, 0.0).unwrap(), 0.0);
        let slow =
            ForwardModel::new(StrainProgram::new(1.0, 20.0, 100.0).unwrap(), DEFAULT_GAMMA)
                .unwrap();
        assert_eq!(slow.stress_single_spring(10.0, 50.0).unwrap(), 200.0);
        assert!(m.stress_single_spring(10.0, 100.5).is_err());
        assert!(m.stress_single_spring(10.0, -0.1).is_err());
    }

    #[test]
    fn element_peaks() {
        let m = fast();
        assert_abs_diff_eq!(m.stress_element(4.0, 0.2, 2.0).unwrap(), 4.00, epsilon = 0.01);
        assert_abs_diff_eq!(m.stress_element(7.0, 3.7, 2.0).unwrap(), 85.57, epsilon = 0.01);
        let slow =
            ForwardModel::new(StrainProgram::new(1.0, 20.0, 100.0).unwrap(), DEFAULT_GAMMA)
                .unwrap();
        assert_abs_diff_eq!(slow.stress_element(1.0, 25.0, 20.0).unwrap(), 9.9, epsilon = 0.1);
        assert!(m.stress_element(1.0, 0.005, 1.0).is_err());
    }

    #[test]
    fn total_stress_at_ramp_end_and_late() {
        let m = fast();
        let p = three_element();
        assert_abs_diff_eq!(m.stress_at(&p, 2.0).unwrap(), 308.05, epsilon = 0.05);
        assert_eq!(m.stress_at(&p, 0.0).unwrap(), 0.0);
        // element residue at t=100: 125·e^(−200/25)·(e^(0.16)−1) plus two terms far below
        assert_abs_diff_eq!(m.stress_at(&p, 100.0).unwrap(), 200.0073, epsilon = 1e-4);
    }

    #[test]
    fn hold_branch_survives_tiny_relaxation_times() {
        let m = fast();
        let s = m.stress_element(50.0, DEFAULT_GAMMA, 2.5).unwrap();
        assert!(s.is_finite() && s >= 0.0);
        assert_eq!(m.stress_element(50.0, DEFAULT_GAMMA, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn canonical_order_sorts_by_relaxation_time() {
        let p = MaterialParams::new(10.0, &[(1.0, 25.0), (4.0, 0.2), (7.0, 3.7)]).unwrap();
        assert_eq!(p, three_element());
        assert_eq!(p.relaxation_times(), vec![0.2, 3.7, 25.0]);
    }

    #[test]
    fn rejects_malformed_vectors() {
        assert!(MaterialParams::from_vector(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(MaterialParams::from_vector(1, vec![1.0, -2.0, 3.0]).is_err());
        assert!(MaterialParams::from_vector(1, vec![1.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn strain_program_invariants() {
        assert!(StrainProgram::new(1.0, 20.0, 20.0).is_err());
        assert!(StrainProgram::new(0.0, 20.0, 100.0).is_err());
        let sp = StrainProgram::new(10.0, 20.0, 100.0).unwrap();
        assert_eq!(sp.strain_at(1.0).unwrap(), 10.0);
        assert_eq!(sp.strain_at(2.0).unwrap(), 20.0);
        let slow = StrainProgram::new(1.0, 20.0, 100.0).unwrap();
        assert_eq!(slow.strain_at(60.0).unwrap(), 20.0);
    }

    #[test]
    fn uniform_grid_counts() {
        let g = uniform_grid(0.01, 100.0).unwrap();
        assert_eq!(g.len(), 10001);
        assert_eq!(*g.last().unwrap(), 100.0);
        check_grid(&g).unwrap();
        assert!(uniform_grid(200.0, 100.0).is_err());
    }

    #[test]
    fn series_rejects_bad_grids() {
        assert!(matches!(
            StressSeries::new(vec![], vec![]),
            Err(Error::EmptySeries)
        ));
        assert!(StressSeries::new(vec![0.0, 0.2, 0.1], vec![0.0; 3]).is_err());
        assert!(StressSeries::new(vec![0.0, 0.1, 0.3], vec![0.0; 3]).is_err());
        assert!(StressSeries::new(vec![0.0, 0.1], vec![0.0]).is_err());
    }
}
