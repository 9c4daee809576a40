//! Synthetic relaxation data: exact stress from known parameters plus
//! Gaussian noise calibrated to an exact relative error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::forward::{
    l2_norm, uniform_grid, ForwardModel, MaterialParams, NoiseRecord, StrainProgram, StressSeries,
};

/// Name written to series metadata so a run can be regenerated.
pub const NOISE_GENERATOR: &str = "ChaCha8Rng/StandardNormal";

/// Requested relative data error and the seed that draws it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    delta_rel: f64,
    seed: u64,
}

impl NoiseSpec {
    /// `delta_rel` must lie in `[0, 1)`; zero means exact data.
    pub fn new(delta_rel: f64, seed: u64) -> Result<Self> {
        if !(delta_rel.is_finite() && (0.0..1.0).contains(&delta_rel)) {
            return Err(Error::config(format!(
                "relative noise level must lie in [0, 1), got {delta_rel}"
            )));
        }
        Ok(Self { delta_rel, seed })
    }

    pub fn delta_rel(&self) -> f64 {
        self.delta_rel
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Perturbs `series` with i.i.d. Gaussian noise rescaled so that
/// `‖σ − σ^δ‖ / ‖σ^δ‖` equals the requested level.
pub fn add_noise(series: &StressSeries, spec: &NoiseSpec) -> Result<StressSeries> {
    if spec.delta_rel == 0.0 {
        return Ok(series.clone());
    }
    let weight = series.quadrature_weight();
    let clean = series.stress();
    let clean_sq = weight * clean.iter().map(|v| v * v).sum::<f64>();
    if clean_sq == 0.0 {
        return Err(Error::domain("cannot calibrate noise on an all-zero series"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let raw: Vec<f64> = (0..clean.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    // Solve ‖s e‖ = δ ‖σ + s e‖ for the positive scale s.
    let d2 = spec.delta_rel * spec.delta_rel;
    let e_sq = weight * raw.iter().map(|v| v * v).sum::<f64>();
    let cross = weight * raw.iter().zip(clean).map(|(e, s)| e * s).sum::<f64>();
    let a = e_sq * (1.0 - d2);
    let b = -2.0 * d2 * cross;
    let c = -d2 * clean_sq;
    let scale = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);

    let noisy: Vec<f64> = clean
        .iter()
        .zip(&raw)
        .map(|(s, e)| s + scale * e)
        .collect();
    let diff: Vec<f64> = noisy.iter().zip(clean).map(|(a, b)| a - b).collect();
    let delta_abs = l2_norm(&diff, weight);
    let achieved_delta_rel = delta_abs / l2_norm(&noisy, weight);
    Ok(series.with_stress(noisy).with_noise(NoiseRecord {
        target_delta_rel: spec.delta_rel,
        achieved_delta_rel,
        delta_abs,
        seed: spec.seed,
        generator: NOISE_GENERATOR.to_string(),
    }))
}

/// `‖σ − σ^δ‖ / ‖σ^δ‖` in the discrete L² norm.
pub fn relative_error(exact: &StressSeries, noisy: &StressSeries) -> Result<f64> {
    if exact.times() != noisy.times() {
        return Err(Error::GridMismatch(format!(
            "exact series has {} samples, noisy has {}",
            exact.len(),
            noisy.len()
        )));
    }
    let weight = exact.quadrature_weight();
    let diff: Vec<f64> = exact
        .stress()
        .iter()
        .zip(noisy.stress())
        .map(|(a, b)| a - b)
        .collect();
    let denom = noisy.norm();
    if denom == 0.0 {
        return Err(Error::domain("noisy series has zero norm"));
    }
    Ok(l2_norm(&diff, weight) / denom)
}

/// Everything needed to synthesize one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub program: StrainProgram,
    pub dt: f64,
    pub gamma: f64,
    pub truth: MaterialParams,
    pub noise: Option<NoiseSpec>,
}

/// Exact data and, when noise was requested, its perturbed copy.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedData {
    pub exact: StressSeries,
    pub noisy: Option<StressSeries>,
}

impl SynthesizedData {
    /// The series an identification run should consume.
    pub fn measured(&self) -> &StressSeries {
        self.noisy.as_ref().unwrap_or(&self.exact)
    }
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<ForwardModel> {
        ForwardModel::new(self.program, self.gamma)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        uniform_grid(self.dt, self.program.horizon())
    }

    pub fn synthesize(&self) -> Result<SynthesizedData> {
        let exact = self.model()?.evaluate(&self.truth, &self.grid()?)?;
        let noisy = match &self.noise {
            Some(spec) if spec.delta_rel() > 0.0 => Some(add_noise(&exact, spec)?),
            _ => None,
        };
        Ok(SynthesizedData { exact, noisy })
    }

    /// Warns when the grid is too coarse to resolve the fastest element.
    pub fn sampling_warning(&self) -> Option<String> {
        let tau_min = self.truth.relaxation_times().into_iter().reduce(f64::min)?;
        (self.dt > tau_min / 2.0).then(|| {
            format!(
                "grid spacing {} exceeds half the smallest relaxation time {tau_min}",
                self.dt
            )
        })
    }
}
