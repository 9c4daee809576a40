use std::fmt::Write as _;

use super::{CandidateStatus, IdentificationResult};
use crate::forward::MaterialParams;
use crate::series_io::format_f64;

fn parameter_table(out: &mut String, params: &MaterialParams) {
    let n = params.element_count();
    let _ = write!(out, "{:>8}", "j");
    for j in 1..=n {
        let _ = write!(out, "{j:>12}");
    }
    out.push('\n');
    let _ = write!(out, "{:>8}", "mu_j");
    for (mu, _) in params.elements() {
        let _ = write!(out, "{mu:>12.4}");
    }
    out.push('\n');
    let _ = write!(out, "{:>8}", "tau_j");
    for (_, tau) in params.elements() {
        let _ = write!(out, "{tau:>12.4}");
    }
    out.push('\n');
    let _ = writeln!(out, "{:>8}{:>12.4}", "mu", params.base_stiffness());
}

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"))
}

impl IdentificationResult {
    /// Human-readable report followed by the key-value block.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}", self.method);
        let _ = writeln!(out, "elements: {}", self.n);
        let _ = writeln!(out, "residual norm: {:.6e}", self.residual_norm());
        out.push('\n');
        if let Some(before) = &self.unclustered {
            out.push_str("before clustering\n");
            parameter_table(&mut out, before);
            out.push_str("\nafter clustering\n");
        }
        parameter_table(&mut out, &self.params);
        out.push_str("\ncandidates\n");
        let _ = writeln!(
            out,
            "{:>4} {:>14} {:>14} {:>14} {:>14}  status",
            "n", "misfit", "logg", "omega", "phi"
        );
        for row in &self.trace {
            let status = match &row.status {
                CandidateStatus::Fitted { stop, .. } => format!("ok ({stop})"),
                CandidateStatus::Failed(m) => format!("failed: {m}"),
            };
            let _ = writeln!(
                out,
                "{:>4} {:>14.6e} {:>14} {:>14.6e} {:>14}  {status}",
                row.n,
                row.misfit,
                optional(row.logg),
                row.penalty,
                optional(row.phi)
            );
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out.push('\n');
        out.push_str(&self.to_key_values());
        out
    }

    /// Machine-readable `key=value` lines, full precision.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str("[result]\n");
        let _ = writeln!(out, "method={}", self.method);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "mu={}", format_f64(self.params.base_stiffness()));
        for (j, (mu, tau)) in self.params.elements().enumerate() {
            let _ = writeln!(out, "mu_{}={}", j + 1, format_f64(mu));
            let _ = writeln!(out, "tau_{}={}", j + 1, format_f64(tau));
        }
        let _ = writeln!(out, "misfit={}", format_f64(self.misfit));
        let _ = writeln!(out, "residual_norm={}", format_f64(self.residual_norm()));
        for row in &self.trace {
            let prefix = format!("candidate.{}", row.n);
            let status = match &row.status {
                CandidateStatus::Fitted { stop, .. } => stop.as_str().to_string(),
                CandidateStatus::Failed(_) => "failed".to_string(),
            };
            let _ = writeln!(out, "{prefix}.status={status}");
            let _ = writeln!(out, "{prefix}.misfit={}", format_f64(row.misfit));
            if let Some(v) = row.logg {
                let _ = writeln!(out, "{prefix}.logg={}", format_f64(v));
            }
            let _ = writeln!(out, "{prefix}.omega={}", format_f64(row.penalty));
            if let Some(v) = row.phi {
                let _ = writeln!(out, "{prefix}.phi={}", format_f64(v));
            }
        }
        out
    }
}
