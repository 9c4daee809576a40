use std::collections::BTreeMap;

use crate::error::Result;
use crate::forward::{ForwardModel, StressSeries};
use crate::solver::{minimize_fixed_n_from, nested_starts, FitResult, PenaltySpec, SolverConfig};

/// Fixed-`n` fits for one data set and one solver setup, each computed at
/// most once.
///
/// When the fit for `n − 1` is already cached, the fit for `n` also starts
/// from that solution with one element split (see
/// [`nested_starts`](crate::solver::nested_starts)), which keeps the misfit
/// non-increasing along a sweep of consecutive counts.
#[derive(Debug)]
pub struct FitCache<'a> {
    model: ForwardModel,
    data: &'a StressSeries,
    penalty: PenaltySpec,
    solver: SolverConfig,
    noise_delta: f64,
    fits: BTreeMap<usize, std::result::Result<FitResult, String>>,
    solves: usize,
}

impl<'a> FitCache<'a> {
    pub fn new(
        model: ForwardModel,
        data: &'a StressSeries,
        penalty: PenaltySpec,
        solver: SolverConfig,
        noise_delta: f64,
    ) -> Result<Self> {
        solver.validate()?;
        Ok(Self {
            model,
            data,
            penalty,
            solver,
            noise_delta,
            fits: BTreeMap::new(),
            solves: 0,
        })
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn data(&self) -> &'a StressSeries {
        self.data
    }

    pub fn penalty(&self) -> PenaltySpec {
        self.penalty
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn noise_delta(&self) -> f64 {
        self.noise_delta
    }

    /// Number of fixed-`n` solves run so far.
    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Fit for `n`, computed on first use. Failures are cached as well.
    pub fn fit(&mut self, n: usize) -> std::result::Result<&FitResult, String> {
        if !self.fits.contains_key(&n) {
            let extra = match n.checked_sub(1).and_then(|p| self.fits.get(&p)) {
                Some(Ok(prev)) => nested_starts(&prev.params, self.model.program().horizon(), self.model.gamma()),
                _ => Vec::new(),
            };
            let outcome = minimize_fixed_n_from(
                &self.model,
                n,
                self.data,
                self.penalty,
                &self.solver,
                self.noise_delta,
                &extra,
            )
            .map_err(|e| e.to_string());
            self.solves += 1;
            self.fits.insert(n, outcome);
        }
        self.fits[&n].as_ref().map_err(Clone::clone)
    }

    /// Every cached outcome, by element count.
    pub fn fits(&self) -> impl Iterator<Item = (usize, std::result::Result<&FitResult, &str>)> {
        self.fits
            .iter()
            .map(|(&n, r)| (n, r.as_ref().map_err(String::as_str)))
    }

    /// Cached outcome for `n`, without solving.
    pub fn cached(&self, n: usize) -> Option<std::result::Result<&FitResult, &str>> {
        self.fits
            .get(&n)
            .map(|r| r.as_ref().map_err(String::as_str))
    }
}
