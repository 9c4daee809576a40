//! Plain-text series files.
//!
//! ```text
//! #dt=1.0000000000000000e-2
//! #T=1.0000000000000000e2
//! #seed=42
//! #rng=ChaCha8Rng/StandardNormal
//! #delta_rel_target=1.0000000000000000e-2
//! #delta_rel=1.0000000000000000e-2
//! #delta_abs=2.0112233445566778e1
//! t,sigma
//! 0.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! round trip. The noise keys appear only for perturbed series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::{check_grid, NoiseRecord, StressSeries};

pub const HEADER: &str = "t,sigma";

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_to_string(series: &StressSeries) -> String {
    let mut out = String::new();
    let times = series.times();
    let _ = writeln!(out, "#dt={}", format_f64(series.dt()));
    let _ = writeln!(out, "#T={}", format_f64(times[times.len() - 1]));
    if let Some(noise) = series.noise() {
        let _ = writeln!(out, "#seed={}", noise.seed);
        let _ = writeln!(out, "#rng={}", noise.generator);
        let _ = writeln!(out, "#delta_rel_target={}", format_f64(noise.target_delta_rel));
        let _ = writeln!(out, "#delta_rel={}", format_f64(noise.achieved_delta_rel));
        let _ = writeln!(out, "#delta_abs={}", format_f64(noise.delta_abs));
    }
    out.push_str(HEADER);
    out.push('\n');
    for (t, s) in times.iter().zip(series.stress()) {
        let _ = writeln!(out, "{},{}", format_f64(*t), format_f64(*s));
    }
    out
}

pub fn write_series(path: &Path, series: &StressSeries) -> Result<()> {
    fs::write(path, series_to_string(series)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_series(path: &Path) -> Result<StressSeries> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_series(&text, path)
}

#[derive(Default)]
struct NoiseFields {
    seed: Option<u64>,
    rng: Option<String>,
    target: Option<f64>,
    achieved: Option<f64>,
    delta_abs: Option<f64>,
}

/// Parses the series format; `origin` only labels error messages.
pub fn parse_series(text: &str, origin: &Path) -> Result<StressSeries> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let number = |line: usize, field: &str, raw: &str| -> Result<f64> {
        raw.trim()
            .parse::<f64>()
            .map_err(|_| err(line, format!("invalid {field} value {raw:?}")))
    };

    let mut noise = NoiseFields::default();
    let mut seen_header = false;
    let mut times = Vec::new();
    let mut stress = Vec::new();
    let mut lines_of_rows = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let Some((key, value)) = meta.split_once('=') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "seed" => {
                    noise.seed = Some(
                        value
                            .parse()
                            .map_err(|_| err(line_no, format!("invalid seed {value:?}")))?,
                    )
                }
                "rng" => noise.rng = Some(value.to_string()),
                "delta_rel_target" => noise.target = Some(number(line_no, "delta_rel_target", value)?),
                "delta_rel" => noise.achieved = Some(number(line_no, "delta_rel", value)?),
                "delta_abs" => noise.delta_abs = Some(number(line_no, "delta_abs", value)?),
                // dt and T are derived from the grid itself
                _ => {}
            }
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(line_no, format!("expected header {HEADER:?}, got {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let (t, s) = line
            .split_once(',')
            .ok_or_else(|| err(line_no, "expected two comma-separated columns".into()))?;
        if s.contains(',') {
            return Err(err(line_no, "expected two comma-separated columns".into()));
        }
        times.push(number(line_no, "time", t)?);
        stress.push(number(line_no, "stress", s)?);
        lines_of_rows.push(line_no);
    }

    if !seen_header {
        return Err(err(text.lines().count().max(1), format!("missing header {HEADER:?}")));
    }
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Err(e) = check_grid(&times) {
        let row = times
            .windows(2)
            .position(|w| w[1] <= w[0])
            .map(|i| lines_of_rows[i + 1])
            .unwrap_or(lines_of_rows[0]);
        return Err(err(row, e.to_string()));
    }

    let series = StressSeries::new(times, stress)?;
    Ok(match noise {
        NoiseFields {
            seed: Some(seed),
            target,
            achieved: Some(achieved),
            delta_abs: Some(delta_abs),
            rng,
        } => series.with_noise(NoiseRecord {
            target_delta_rel: target.unwrap_or(achieved),
            achieved_delta_rel: achieved,
            delta_abs,
            seed,
            generator: rng.unwrap_or_default(),
        }),
        _ => series,
    })
}
