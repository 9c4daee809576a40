use super::{
    bayes_identify_cached, cluster_identify_cached, residual_identify_cached, FitCache, IdentificationResult,
    PhiWeights, PriorConfig, TieBreak,
};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, StressSeries};
use crate::solver::{PenaltySpec, SolverConfig};

/// Everything a pipeline may consult. Each method reads only its own part.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifySettings {
    pub prior: PriorConfig,
    pub weights: PhiWeights,
    /// Penalty of the inner fits for the MAP and cluster pipelines. The
    /// residual sweep always fits without one.
    pub penalty: PenaltySpec,
    pub solver: SolverConfig,
    /// Noise level for the discrepancy stop; zero disables it.
    pub noise_delta: f64,
    pub cluster_max_elements: usize,
    pub ties: TieBreak,
}

impl Default for IdentifySettings {
    fn default() -> Self {
        Self {
            prior: PriorConfig::up_to(0.1, 5).expect("valid default prior"),
            weights: PhiWeights::default(),
            penalty: PenaltySpec::none(),
            solver: SolverConfig::default(),
            noise_delta: 0.0,
            cluster_max_elements: 5,
            ties: TieBreak::default(),
        }
    }
}

/// One data set and the fits computed on it so far. Methods run in the
/// same session reuse fits whose solver setup matches.
#[derive(Debug)]
pub struct Session<'a> {
    model: ForwardModel,
    data: &'a StressSeries,
    caches: Vec<FitCache<'a>>,
}

impl<'a> Session<'a> {
    pub fn new(model: ForwardModel, data: &'a StressSeries) -> Self {
        Self {
            model,
            data,
            caches: Vec::new(),
        }
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn data(&self) -> &'a StressSeries {
        self.data
    }

    /// Cache for the given fit setup, created on first use.
    pub fn cache(&mut self, penalty: PenaltySpec, solver: &SolverConfig, noise_delta: f64) -> Result<&mut FitCache<'a>> {
        let found = self
            .caches
            .iter()
            .position(|c| c.penalty() == penalty && c.solver() == solver && c.noise_delta() == noise_delta);
        let idx = match found {
            Some(i) => i,
            None => {
                self.caches
                    .push(FitCache::new(self.model, self.data, penalty, solver.clone(), noise_delta)?);
                self.caches.len() - 1
            }
        };
        Ok(&mut self.caches[idx])
    }

    pub fn caches(&self) -> &[FitCache<'a>] {
        &self.caches
    }

    /// Fixed-`n` solves run across all caches.
    pub fn solves(&self) -> usize {
        self.caches.iter().map(FitCache::solves).sum()
    }
}

/// A model-order selection pipeline.
pub trait IdentificationMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn identify(&self, session: &mut Session<'_>, settings: &IdentifySettings) -> Result<IdentificationResult>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BayesMethod;

impl IdentificationMethod for BayesMethod {
    fn name(&self) -> &'static str {
        "bayes"
    }

    fn summary(&self) -> &'static str {
        "greedy MAP search under a binomial prior on the element count"
    }

    fn identify(&self, session: &mut Session<'_>, settings: &IdentifySettings) -> Result<IdentificationResult> {
        let cache = session.cache(settings.penalty, &settings.solver, settings.noise_delta)?;
        bayes_identify_cached(cache, &settings.prior, settings.weights)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClusterMethod;

impl IdentificationMethod for ClusterMethod {
    fn name(&self) -> &'static str {
        "cluster"
    }

    fn summary(&self) -> &'static str {
        "one fit with many elements, merged per decade of relaxation time"
    }

    fn identify(&self, session: &mut Session<'_>, settings: &IdentifySettings) -> Result<IdentificationResult> {
        let cache = session.cache(settings.penalty, &settings.solver, settings.noise_delta)?;
        cluster_identify_cached(cache, settings.cluster_max_elements)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualMethod;

impl IdentificationMethod for ResidualMethod {
    fn name(&self) -> &'static str {
        "residual"
    }

    fn summary(&self) -> &'static str {
        "smallest misfit over the candidate counts (over-fitting baseline)"
    }

    fn identify(&self, session: &mut Session<'_>, settings: &IdentifySettings) -> Result<IdentificationResult> {
        let cache = session.cache(PenaltySpec::none(), &settings.solver, settings.noise_delta)?;
        residual_identify_cached(cache, settings.prior.candidates(), settings.ties)
    }
}

/// Identification methods by name.
#[derive(Default)]
pub struct MethodRegistry {
    methods: Vec<Box<dyn IdentificationMethod>>,
}

impl MethodRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `bayes`, `cluster` and `residual`.
    pub fn with_builtins() -> Self {
        let mut registry = Self::new();
        for method in [
            Box::new(BayesMethod) as Box<dyn IdentificationMethod>,
            Box::new(ClusterMethod),
            Box::new(ResidualMethod),
        ] {
            registry.register(method).expect("builtin names are distinct");
        }
        registry
    }

    pub fn register(&mut self, method: Box<dyn IdentificationMethod>) -> Result<()> {
        if self.get(method.name()).is_some() {
            return Err(Error::Config(format!(
                "method {:?} is already registered",
                method.name()
            )));
        }
        self.methods.push(method);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn IdentificationMethod> {
        self.methods.iter().find(|m| m.name() == name).map(|m| m.as_ref())
    }

    /// Looks a method up, failing with the list of known names.
    pub fn resolve(&self, name: &str) -> Result<&dyn IdentificationMethod> {
        self.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown method {name:?} (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn IdentificationMethod> {
        self.methods.iter().map(|m| m.as_ref())
    }
}

impl std::fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MethodRegistry").field("methods", &self.names()).finish()
    }
}
