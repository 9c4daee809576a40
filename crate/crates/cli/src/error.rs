use std::fmt;
use std::path::Path;

/// Exit status of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Io = 3,
    Pipeline = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            kind: ExitKind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn pipeline(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Pipeline,
            message: message.into(),
        }
    }

    pub fn code(&self) -> u8 {
        self.kind as u8
    }

    /// Classifies a library error raised while loading configuration.
    pub fn from_config(err: relaxid::Error) -> Self {
        match err {
            relaxid::Error::Io { path, source } => Self::io(&path, source),
            other => Self::config(other.to_string()),
        }
    }

    /// Classifies a library error raised while reading input data.
    pub fn from_input(err: relaxid::Error) -> Self {
        match err {
            relaxid::Error::Io { path, source } => Self::io(&path, source),
            other => Self {
                kind: ExitKind::Io,
                message: other.to_string(),
            },
        }
    }

    /// Classifies a library error raised by a pipeline run.
    pub fn from_pipeline(err: relaxid::Error) -> Self {
        match err {
            relaxid::Error::Io { path, source } => Self::io(&path, source),
            relaxid::Error::Config(m) => Self::config(m),
            other => Self::pipeline(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
