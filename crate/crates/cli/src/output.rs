use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use relaxid::series_io::{format_f64, series_to_string};
use relaxid::{ForwardModel, MaterialParams, StressSeries};

use crate::error::{CliError, CliResult};
use crate::manifest::MANIFEST_FILE;

/// Collects the files a command writes into one directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Relative names of every file written so far, in order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(PathBuf::from(name));
        Ok(path)
    }

    /// Series file with a back-reference to the manifest.
    pub fn write_series(&mut self, name: &str, series: &StressSeries) -> CliResult<PathBuf> {
        let text = format!("#manifest={MANIFEST_FILE}\n{}", series_to_string(series));
        self.write(name, &text)
    }
}

/// `t,measured,fitted[,exact]` columns for plotting a fit against its data.
pub fn fitted_csv(
    model: &ForwardModel,
    params: &MaterialParams,
    measured: &StressSeries,
    exact: Option<&StressSeries>,
) -> relaxid::Result<String> {
    let fitted = model.evaluate(params, measured.times())?;
    let mut out = format!("#manifest={MANIFEST_FILE}\n");
    out.push_str(if exact.is_some() { "t,measured,fitted,exact\n" } else { "t,measured,fitted\n" });
    for (i, (&t, &m)) in measured.times().iter().zip(measured.stress()).enumerate() {
        let _ = write!(out, "{},{},{}", format_f64(t), format_f64(m), format_f64(fitted.stress()[i]));
        if let Some(e) = exact {
            let _ = write!(out, ",{}", format_f64(e.stress()[i]));
        }
        out.push('\n');
    }
    Ok(out)
}
