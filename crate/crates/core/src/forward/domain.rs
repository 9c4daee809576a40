use std::fmt;

/// One broken constraint of the admissible parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Fewer than `2n + 1` entries.
    Length { expected: usize, actual: usize },
    /// NaN or infinite entry.
    NonFinite { index: usize },
    Negative { index: usize, value: f64 },
    /// Relaxation time of element `element` (1-based) below the floor.
    TauFloor { element: usize, value: f64 },
    /// Nonzero entry past index `2n`.
    Tail { index: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { expected, actual } => {
                write!(f, "length: expected {expected} entries, got {actual}")
            }
            Violation::NonFinite { index } => write!(f, "non-finite entry at {index}"),
            Violation::Negative { index, value } => {
                write!(f, "negativity: entry {index} is {value}")
            }
            Violation::TauFloor { element, value } => {
                write!(f, "tau-floor: tau_{element} = {value}")
            }
            Violation::Tail { index, value } => {
                write!(f, "tail: entry {index} is {value}, expected 0")
            }
        }
    }
}

/// Outcome of checking `(n, x)` against the admissible set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainReport {
    pub violations: Vec<Violation>,
}

impl DomainReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_tau_floor_violation(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v, Violation::TauFloor { .. }))
    }

    pub fn has_tail_violation(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v, Violation::Tail { .. }))
    }
}

/// Checks `x = (μ, μ₁, τ₁, …)` for `n` elements against floor `gamma`.
///
/// `x` may be longer than `2n + 1`; the extra entries form the tail, which
/// must be zero.
pub fn validate_domain(n: usize, x: &[f64], gamma: f64) -> DomainReport {
    let mut violations = Vec::new();
    let active = 2 * n + 1;
    if x.len() < active {
        violations.push(Violation::Length {
            expected: active,
            actual: x.len(),
        });
    }
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            violations.push(Violation::NonFinite { index });
        } else if index >= active {
            if value != 0.0 {
                violations.push(Violation::Tail { index, value });
            }
        } else if value < 0.0 {
            violations.push(Violation::Negative { index, value });
        }
    }
    for element in 1..=n {
        if let Some(&value) = x.get(2 * element) {
            if value.is_finite() && value < gamma {
                violations.push(Violation::TauFloor { element, value });
            }
        }
    }
    DomainReport { violations }
}
