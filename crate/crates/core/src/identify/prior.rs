use crate::error::{Error, Result};

/// Binomial prior over the element count.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    q: f64,
    candidates: Vec<usize>,
}

impl PriorConfig {
    /// `candidates` must be non-empty, strictly increasing and free of zero;
    /// the largest one becomes the prior's `M`.
    pub fn new(q: f64, candidates: Vec<usize>) -> Result<Self> {
        check_q(q)?;
        if candidates.is_empty() {
            return Err(Error::config("candidate set must not be empty"));
        }
        if candidates[0] == 0 {
            return Err(Error::config("candidate element counts must be positive"));
        }
        if candidates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(format!(
                "candidate set must be strictly increasing, got {candidates:?}"
            )));
        }
        Ok(Self { q, candidates })
    }

    /// `q` with candidates `1..=max`.
    pub fn up_to(q: f64, max: usize) -> Result<Self> {
        Self::new(q, (1..=max).collect())
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// `M`, the number of trials of the binomial.
    pub fn max_elements(&self) -> usize {
        *self.candidates.last().expect("candidate set is non-empty")
    }

    pub fn log_prior_penalty(&self, n: usize) -> Result<f64> {
        log_prior_penalty(n, self.q, self.max_elements())
    }

    /// Same prior with another success probability.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(q, self.candidates.clone())
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!(
            "success probability must lie in (0, 1), got {q}"
        )));
    }
    Ok(())
}

fn ln_binomial_pmf(n: usize, q: f64, m: usize) -> Result<f64> {
    check_q(q)?;
    if n > m {
        return Err(Error::domain(format!(
            "element count {n} exceeds the prior maximum {m}"
        )));
    }
    let k = n.min(m - n);
    let ln_choose: f64 = (1..=k)
        .map(|i| ((m - k + i) as f64 / i as f64).ln())
        .sum();
    Ok(ln_choose + n as f64 * q.ln() + (m - n) as f64 * (-q).ln_1p())
}

/// `C(M,n) qⁿ (1−q)^(M−n)`, evaluated in log space.
pub fn binomial_pmf(n: usize, q: f64, m: usize) -> Result<f64> {
    ln_binomial_pmf(n, q, m).map(f64::exp)
}

/// `logg(n) = −log B(n | q, M)`.
pub fn log_prior_penalty(n: usize, q: f64, m: usize) -> Result<f64> {
    ln_binomial_pmf(n, q, m).map(|v| -v)
}
