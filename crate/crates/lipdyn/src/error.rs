use std::fmt;
use std::io;
use std::path::PathBuf;

/// Failures of the front-end: numerics errors plus file and usage problems.
#[derive(Debug)]
pub enum CliError {
    Core(lipdyn_core::Error),
    Io { path: PathBuf, source: io::Error },
    Csv { path: PathBuf, message: String },
    Usage(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::Csv { .. } => "CsvError",
            CliError::Usage(_) => "UsageError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Csv { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<lipdyn_core::Error> for CliError {
    fn from(e: lipdyn_core::Error) -> Self {
        CliError::Core(e)
    }
}
