//! Flat `section.key = value` configuration.
//!
//! ```text
//! # experiment 1
//! model.mu = 10
//! model.elements = 4:0.2, 7:3.7, 1:25
//! strain.rate = 10
//! strain.max = 20
//! strain.horizon = 100
//! grid.dt = 0.01
//! noise.delta_rel = 0.01
//! noise.seed = 7
//! prior.q = 0.1
//! prior.candidates = 1..5
//! ```
//!
//! `#` starts a comment. Unknown and repeated keys are rejected so that a
//! typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forward::{ForwardModel, MaterialParams, StrainProgram, StressSeries, DEFAULT_GAMMA};
use crate::identify::{IdentifySettings, PhiWeights, PriorConfig, TieBreak};
use crate::solver::{PenaltyKind, PenaltySpec, SolverConfig};
use crate::synth::{ExperimentConfig, NoiseSpec};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("model.mu", "base spring stiffness of the true model"),
    ("model.elements", "true elements as stiffness:time pairs, comma separated"),
    ("model.gamma", "lower bound on relaxation times"),
    ("strain.rate", "ramp strain rate in percent per second"),
    ("strain.max", "hold strain in percent"),
    ("strain.horizon", "end of the experiment in seconds"),
    ("grid.dt", "sampling interval"),
    ("noise.delta_rel", "relative noise level, 0 for exact data"),
    ("noise.seed", "noise generator seed"),
    ("prior.q", "binomial success probability"),
    ("prior.candidates", "candidate element counts, a..b or a list"),
    ("prior.alpha", "weight of logg(n)"),
    ("prior.combined", "also add the weighted penalty to phi (true/false)"),
    ("penalty.kind", "none, full_norm or tau1_only"),
    ("penalty.alpha", "penalty weight"),
    ("solver.multistarts", "number of initial points per fit"),
    ("solver.max_iterations", "iteration cap per descent"),
    ("solver.gradient_tol", "projected gradient tolerance"),
    ("solver.step_tol", "relative step tolerance"),
    ("solver.zeta", "discrepancy factor, above 1"),
    ("solver.damping_initial", "initial damping"),
    ("solver.damping_factor", "damping update factor"),
    ("solver.stiffness_min", "lower end of start stiffnesses"),
    ("solver.stiffness_max", "upper end of start stiffnesses"),
    ("solver.seed", "start point seed"),
    ("cluster.max_elements", "element count of the clustering fit"),
    ("identify.noise_delta", "noise level for the discrepancy stop: a number, or `data` for the series' own"),
    ("residual.ties", "larger or smaller"),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    origin: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// `origin` labels error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut config = Config {
            origin: origin.to_path_buf(),
            entries: BTreeMap::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config.parse_error(line, format!("expected `key = value`, got {content:?}")));
            };
            let key = key.trim();
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(config.parse_error(line, format!("unknown key {key:?}")));
            }
            if let Some(prev) = config.entries.get(key) {
                return Err(config.parse_error(line, format!("{key} already set on line {}", prev.line)));
            }
            config.entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(config)
    }

    fn parse_error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.origin.clone(),
            line,
            message,
        }
    }

    /// Sets or replaces a key, as a command-line override would.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.into(),
                line: 0,
            },
        );
        Ok(())
    }

    /// Takes every entry of `other`, replacing existing values.
    pub fn merge(&mut self, other: &Config) {
        for (k, e) in &other.entries {
            self.entries.insert(k.clone(), e.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Canonical text form: one `key = value` line per entry, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.entries {
            let _ = writeln!(out, "{k} = {}", e.value);
        }
        out
    }

    fn value_error(&self, key: &str, message: impl std::fmt::Display) -> Error {
        let at = match self.entries.get(key) {
            Some(e) if e.line > 0 => format!("{}:{}: ", self.origin.display(), e.line),
            _ => String::new(),
        };
        Error::Config(format!("{at}{key}: {message}"))
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| self.value_error(key, format!("invalid value {v:?} ({e})"))))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.typed(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.typed(key)?.unwrap_or(default))
    }

    fn wrap<T>(&self, key: &str, result: Result<T>) -> Result<T> {
        result.map_err(|e| self.value_error(key, e))
    }

    pub fn strain_program(&self) -> Result<StrainProgram> {
        let program = StrainProgram::new(
            self.required("strain.rate")?,
            self.required("strain.max")?,
            self.required("strain.horizon")?,
        );
        self.wrap("strain", program)
    }

    pub fn gamma(&self) -> Result<f64> {
        self.or("model.gamma", DEFAULT_GAMMA)
    }

    pub fn model(&self) -> Result<ForwardModel> {
        let gamma = self.gamma()?;
        self.wrap("model.gamma", ForwardModel::new(self.strain_program()?, gamma))
    }

    pub fn truth(&self) -> Result<MaterialParams> {
        let mu = self.required("model.mu")?;
        let raw = self
            .get("model.elements")
            .ok_or_else(|| Error::Config("missing required key model.elements".into()))?;
        let elements = parse_elements(raw).map_err(|e| self.value_error("model.elements", e))?;
        self.wrap("model.elements", MaterialParams::new(mu, &elements))
    }

    pub fn noise(&self) -> Result<Option<NoiseSpec>> {
        let delta = self.or("noise.delta_rel", 0.0)?;
        if delta == 0.0 {
            return Ok(None);
        }
        let seed = self.or("noise.seed", 0u64)?;
        self.wrap("noise.delta_rel", NoiseSpec::new(delta, seed)).map(Some)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let experiment = ExperimentConfig {
            program: self.strain_program()?,
            dt: self.required("grid.dt")?,
            gamma: self.gamma()?,
            truth: self.truth()?,
            noise: self.noise()?,
        };
        // surface grid problems as configuration errors
        self.wrap("grid.dt", experiment.grid())?;
        self.wrap("model.gamma", experiment.model())?;
        Ok(experiment)
    }

    pub fn prior(&self) -> Result<PriorConfig> {
        let q = self.or("prior.q", 0.1)?;
        let candidates = match self.get("prior.candidates") {
            Some(raw) => parse_candidates(raw).map_err(|e| self.value_error("prior.candidates", e))?,
            None => (1..=5).collect(),
        };
        self.wrap("prior", PriorConfig::new(q, candidates))
    }

    pub fn phi_weights(&self) -> Result<PhiWeights> {
        let weights = PhiWeights::new(self.or("prior.alpha", 1.0)?, self.or("prior.combined", false)?);
        self.wrap("prior.alpha", weights)
    }

    pub fn penalty(&self) -> Result<PenaltySpec> {
        let kind: PenaltyKind = self.or("penalty.kind", PenaltyKind::None)?;
        let spec = PenaltySpec::new(kind, self.or("penalty.alpha", 1.0)?);
        self.wrap("penalty.alpha", spec)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            multistarts: self.or("solver.multistarts", d.multistarts)?,
            max_iterations: self.or("solver.max_iterations", d.max_iterations)?,
            gradient_tol: self.or("solver.gradient_tol", d.gradient_tol)?,
            step_tol: self.or("solver.step_tol", d.step_tol)?,
            zeta: self.or("solver.zeta", d.zeta)?,
            damping_initial: self.or("solver.damping_initial", d.damping_initial)?,
            damping_factor: self.or("solver.damping_factor", d.damping_factor)?,
            stiffness_start_range: (
                self.or("solver.stiffness_min", d.stiffness_start_range.0)?,
                self.or("solver.stiffness_max", d.stiffness_start_range.1)?,
            ),
            seed: self.or("solver.seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Noise level for the discrepancy stop. `data` takes the absolute level
    /// recorded in the series, or zero when none is recorded.
    pub fn noise_delta(&self, data: Option<&StressSeries>) -> Result<f64> {
        match self.get("identify.noise_delta") {
            None => Ok(0.0),
            Some("data") => Ok(data.and_then(StressSeries::noise).map_or(0.0, |n| n.delta_abs)),
            Some(_) => {
                let v: f64 = self.required("identify.noise_delta")?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(self.value_error("identify.noise_delta", "must be non-negative"));
                }
                Ok(v)
            }
        }
    }

    pub fn identify_settings(&self, data: Option<&StressSeries>) -> Result<IdentifySettings> {
        let max_elements: usize = self.or("cluster.max_elements", 5)?;
        if max_elements == 0 {
            return Err(self.value_error("cluster.max_elements", "must be at least 1"));
        }
        Ok(IdentifySettings {
            prior: self.prior()?,
            weights: self.phi_weights()?,
            penalty: self.penalty()?,
            solver: self.solver()?,
            noise_delta: self.noise_delta(data)?,
            cluster_max_elements: max_elements,
            ties: self.or("residual.ties", TieBreak::default())?,
        })
    }
}

/// `"4:0.2, 7:3.7"` → `[(4, 0.2), (7, 3.7)]`; empty text gives no elements.
pub fn parse_elements(raw: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (mu, tau) = pair
                .split_once(':')
                .ok_or_else(|| format!("expected stiffness:time, got {pair:?}"))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("invalid number {s:?} in {pair:?}"));
            Ok((num(mu)?, num(tau)?))
        })
        .collect()
}

/// `"1..5"` (inclusive) or `"1, 3, 5"`.
pub fn parse_candidates(raw: &str) -> std::result::Result<Vec<usize>, String> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("invalid count {s:?}"));
    if let Some((a, b)) = raw.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty range {raw:?}"));
        }
        return Ok((a..=b).collect());
    }
    raw.split(',').map(num).collect()
}

/// Formats elements the way [`parse_elements`] reads them.
pub fn format_elements(params: &MaterialParams) -> String {
    params
        .elements()
        .map(|(m, t)| format!("{m}:{t}"))
        .collect::<Vec<_>>()
        .join(", ")
}
