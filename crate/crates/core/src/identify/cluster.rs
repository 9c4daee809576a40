use std::collections::BTreeMap;
use std::fmt;

use super::{debug_check, misfit_of, trace_row, FitCache, IdentificationResult, MethodTag};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, MaterialParams, StressSeries};
use crate::solver::{PenaltySpec, SolverConfig};

/// Relaxation-time bucket. Everything below one second shares
/// [`Decade::Sub`]; `Decade::Power(k)` holds `[10^k, 10^(k+1))` for `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decade {
    Sub,
    Power(i32),
}

impl Decade {
    /// Bucket holding `tau`, which must be positive and finite.
    pub fn of(tau: f64) -> Self {
        if tau < 1.0 {
            return Decade::Sub;
        }
        let mut k = tau.log10().floor() as i32;
        // guard against log10 rounding at exact powers of ten
        while 10f64.powi(k + 1) <= tau {
            k += 1;
        }
        while 10f64.powi(k) > tau {
            k -= 1;
        }
        Decade::Power(k)
    }
}

impl fmt::Display for Decade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decade::Sub => write!(f, "[gamma,1)"),
            Decade::Power(k) => write!(f, "[1e{k},1e{})", k + 1),
        }
    }
}

/// Element indices (0-based, in input order) grouped by decade.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecadePartition {
    pub buckets: BTreeMap<Decade, Vec<usize>>,
}

impl DecadePartition {
    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

/// Groups relaxation times by decade.
pub fn decade_partition(taus: &[f64], gamma: f64) -> Result<DecadePartition> {
    let mut partition = DecadePartition::default();
    for (j, &tau) in taus.iter().enumerate() {
        if !(tau.is_finite() && tau >= gamma) {
            return Err(Error::Domain(format!(
                "relaxation time {tau} of element {} is below the floor {gamma}",
                j + 1
            )));
        }
        partition.buckets.entry(Decade::of(tau)).or_default().push(j);
    }
    Ok(partition)
}

/// Merges one bucket into `(Σμⱼ, Σ(μⱼ/Σμ)τⱼ)`. Buckets without stiffness
/// contribute nothing and give `None`.
pub fn merge_cluster(mus: &[f64], taus: &[f64]) -> Result<Option<(f64, f64)>> {
    if mus.is_empty() || mus.len() != taus.len() {
        return Err(Error::Domain(format!(
            "bucket needs matching non-empty stiffness and time lists, got {} and {}",
            mus.len(),
            taus.len()
        )));
    }
    let total: f64 = mus.iter().sum();
    if total <= 0.0 {
        return Ok(None);
    }
    let tau = mus.iter().zip(taus).map(|(m, t)| m / total * t).sum();
    Ok(Some((total, tau)))
}

/// Decade clustering with a fresh fit cache.
pub fn cluster_identify(
    model: &ForwardModel,
    data: &StressSeries,
    max_elements: usize,
    solver: &SolverConfig,
    penalty: PenaltySpec,
    noise_delta: f64,
) -> Result<IdentificationResult> {
    let mut cache = FitCache::new(*model, data, penalty, solver.clone(), noise_delta)?;
    cluster_identify_cached(&mut cache, max_elements)
}

/// Fits `max_elements` elements once, then merges each decade bucket into a
/// single element.
pub fn cluster_identify_cached(cache: &mut FitCache<'_>, max_elements: usize) -> Result<IdentificationResult> {
    if max_elements == 0 {
        return Err(Error::Config("cluster.max_elements must be at least 1".into()));
    }
    let row = trace_row(cache, max_elements, None)?;
    let Some(fitted) = row.params.clone() else {
        return Err(Error::Pipeline(format!(
            "fit with {max_elements} elements failed: {:?}",
            row.status
        )));
    };
    let gamma = cache.model().gamma();
    let elements: Vec<(f64, f64)> = fitted.elements().collect();
    let taus: Vec<f64> = elements.iter().map(|e| e.1).collect();
    let partition = decade_partition(&taus, gamma)?;

    let mut merged = Vec::with_capacity(partition.len());
    let mut notes = Vec::new();
    for (decade, members) in &partition.buckets {
        let mus: Vec<f64> = members.iter().map(|&j| elements[j].0).collect();
        let ts: Vec<f64> = members.iter().map(|&j| elements[j].1).collect();
        match merge_cluster(&mus, &ts)? {
            Some((mu, tau)) => {
                if members.len() > 1 {
                    notes.push(format!("merged {} elements in {decade}", members.len()));
                }
                merged.push((mu, tau.max(gamma)));
            }
            None => notes.push(format!("dropped {decade}: no stiffness")),
        }
    }
    let params = MaterialParams::new(fitted.base_stiffness(), &merged)?;
    let misfit = misfit_of(cache, &params)?;
    let result = IdentificationResult {
        method: MethodTag::Cluster,
        n: params.element_count(),
        params,
        misfit,
        trace: vec![row],
        unclustered: Some(fitted),
        notes,
    };
    debug_check(&result, gamma);
    Ok(result)
}
