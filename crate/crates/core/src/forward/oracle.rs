use super::{grid_spacing, ForwardModel, MaterialParams, StressSeries};
use crate::error::{Error, Result};

/// Reference solution obtained by integrating the inelastic-strain evolution
/// `ε̇ⁱⱼ = (ε − εⁱⱼ) / (τⱼ/2)` with fixed-step classical Runge–Kutta and
/// assembling `σ = μ ε + Σ μⱼ (ε − εⁱⱼ)`.
///
/// It shares no code path with the closed form beyond the strain program, so
/// agreement between the two is a meaningful check of either.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOracle {
    /// Sub-steps per output grid interval.
    pub refinement: usize,
}

impl Default for OdeOracle {
    fn default() -> Self {
        Self { refinement: 100 }
    }
}

impl OdeOracle {
    pub fn new(refinement: usize) -> Self {
        Self { refinement }
    }

    pub fn evaluate(
        &self,
        model: &ForwardModel,
        params: &MaterialParams,
        times: &[f64],
    ) -> Result<StressSeries> {
        model.check_params(params)?;
        for &t in times {
            model.program().check_time(t)?;
        }
        if self.refinement == 0 {
            return Err(Error::config("oracle refinement must be at least 1"));
        }
        let interval = if times.len() > 1 {
            grid_spacing(times)
        } else {
            times.first().copied().unwrap_or(0.0)
        };
        let substep = interval / self.refinement as f64;
        let elements: Vec<(f64, f64)> = params.elements().collect();
        if let Some(tau_min) = elements.iter().map(|e| e.1).reduce(f64::min) {
            if substep > tau_min / 10.0 {
                return Err(Error::domain(format!(
                    "integrator step {substep} exceeds tau_min/10 = {}",
                    tau_min / 10.0
                )));
            }
        }

        let program = *model.program();
        let rhs = |t: f64, y: f64, tau: f64| (program.strain_unchecked(t) - y) * 2.0 / tau;
        let kink = program.ramp_end();
        let mut inelastic = vec![0.0; elements.len()];
        let mut clock = 0.0;

        let advance = |from: f64, to: f64, steps: usize, inelastic: &mut [f64]| {
            let h = (to - from) / steps as f64;
            for s in 0..steps {
                let t = from + s as f64 * h;
                for (y, &(_, tau)) in inelastic.iter_mut().zip(&elements) {
                    let k1 = rhs(t, *y, tau);
                    let k2 = rhs(t + 0.5 * h, *y + 0.5 * h * k1, tau);
                    let k3 = rhs(t + 0.5 * h, *y + 0.5 * h * k2, tau);
                    let k4 = rhs(t + h, *y + h * k3, tau);
                    *y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
        };

        let mut stress = Vec::with_capacity(times.len());
        for &target in times {
            if target > clock && !elements.is_empty() {
                // split at the ramp end so no RK stage straddles the kink
                let mut segments = vec![clock];
                if clock < kink && kink < target {
                    segments.push(kink);
                }
                segments.push(target);
                for w in segments.windows(2) {
                    let steps = ((w[1] - w[0]) / substep).ceil().max(1.0) as usize;
                    advance(w[0], w[1], steps, &mut inelastic);
                }
            }
            clock = target;
            let strain = program.strain_unchecked(target);
            let sigma = params.base_stiffness() * strain
                + elements
                    .iter()
                    .zip(&inelastic)
                    .map(|(&(mu, _), y)| mu * (strain - y))
                    .sum::<f64>();
            stress.push(sigma);
        }
        StressSeries::new(times.to_vec(), stress)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{uniform_grid, StrainProgram, DEFAULT_GAMMA};

    fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn spring_only_matches_spring_samples() {
        let model =
            ForwardModel::new(StrainProgram::new(10.0, 20.0, 100.0).unwrap(), DEFAULT_GAMMA)
                .unwrap();
        let p = MaterialParams::new(10.0, &[]).unwrap();
        let grid = uniform_grid(0.5, 100.0).unwrap();
        let ode = OdeOracle::default().evaluate(&model, &p, &grid).unwrap();
        for (&t, &s) in grid.iter().zip(ode.stress()) {
            assert_eq!(s, model.stress_single_spring(10.0, t).unwrap());
        }
    }

    #[test]
    fn single_element_matches_closed_form() {
        let model =
            ForwardModel::new(StrainProgram::new(1.0, 1.0, 10.0).unwrap(), DEFAULT_GAMMA)
                .unwrap();
        let p = MaterialParams::new(0.0, &[(1.0, 1.0)]).unwrap();
        let grid = uniform_grid(0.01, 10.0).unwrap();
        let ode = OdeOracle::default().evaluate(&model, &p, &grid).unwrap();
        let exact = model.evaluate(&p, &grid).unwrap();
        assert!(max_relative_error(ode.stress(), exact.stress()) < 1e-6);
    }

    #[test]
    fn refuses_coarse_steps() {
        let model =
            ForwardModel::new(StrainProgram::new(10.0, 20.0, 100.0).unwrap(), DEFAULT_GAMMA)
                .unwrap();
        let p = MaterialParams::new(10.0, &[(4.0, 0.2)]).unwrap();
        let grid = uniform_grid(1.0, 100.0).unwrap();
        assert!(OdeOracle::new(10).evaluate(&model, &p, &grid).is_err());
    }
}
