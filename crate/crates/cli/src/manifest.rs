use std::fmt::Write as _;
use std::path::PathBuf;

use relaxid::config::Config;

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Record of one command invocation. Together with the inputs it is enough
/// to regenerate every output; the timings are the only part that varies
/// between runs.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: Config,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seeds: Vec<(String, u64)>,
    pub timings: Vec<(String, f64)>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: Config) -> Self {
        Self {
            command: command.into(),
            config,
            ..Self::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tool=relaxid {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "command={}", self.command);
        for (name, seed) in &self.seeds {
            let _ = writeln!(out, "seed.{name}={seed}");
        }
        for path in &self.inputs {
            let _ = writeln!(out, "input={}", path.display());
        }
        for path in &self.outputs {
            let _ = writeln!(out, "output={}", path.display());
        }
        for (label, secs) in &self.timings {
            let _ = writeln!(out, "time.{label}={secs:.3}");
        }
        out.push_str("[config]\n");
        out.push_str(&self.config.to_text());
        out
    }
}
