use super::{l2_norm, quadrature_weight, ForwardModel, MaterialParams};
use crate::error::{Error, Result};

/// Distances for one member `x_k` of the non-converging sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeStep {
    pub k: usize,
    /// `‖F(n⁺+1, x_k) − F(n⁺, x⁺)‖` in the discrete L² norm.
    pub image_distance: f64,
    /// `‖x_k − x⁺‖` in ℓ².
    pub parameter_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub radius: f64,
    pub steps: Vec<ProbeStep>,
}

impl ProbeReport {
    /// `dist(k) / dist(1)` for every step.
    pub fn image_ratios(&self) -> Vec<f64> {
        let first = self.steps[0].image_distance;
        self.steps
            .iter()
            .map(|s| s.image_distance / first)
            .collect()
    }
}

/// Appends an extra element `(r/(2k), r/2)` to `params` for `k = 1..=k_max`
/// and measures how far the perturbed model moves in data space versus
/// parameter space. The image distance shrinks like `1/k` while the
/// parameter distance stays near `r/2`: small data changes do not pin the
/// parameters down.
pub fn illposedness_probe(
    model: &ForwardModel,
    params: &MaterialParams,
    times: &[f64],
    radius: f64,
    k_max: usize,
) -> Result<ProbeReport> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    if radius / 2.0 < model.gamma() {
        return Err(Error::domain(format!(
            "extra relaxation time r/2 = {} is below the floor {}",
            radius / 2.0,
            model.gamma()
        )));
    }
    if k_max == 0 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    let reference = model.evaluate(params, times)?;
    let weight = quadrature_weight(times);
    // x⁺ extended by zeros to the length of x_k
    let mut base = params.as_slice().to_vec();
    base.extend([0.0, 0.0]);

    let mut steps = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut perturbed = params.as_slice().to_vec();
        perturbed.extend([radius / (2.0 * k as f64), radius / 2.0]);
        let image: Vec<f64> = times
            .iter()
            .zip(reference.stress())
            .map(|(&t, &s)| model.total_stress(&perturbed, t) - s)
            .collect();
        let parameter_distance = perturbed
            .iter()
            .zip(&base)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        steps.push(ProbeStep {
            k,
            image_distance: l2_norm(&image, weight),
            parameter_distance,
        });
    }
    Ok(ProbeReport { radius, steps })
}
