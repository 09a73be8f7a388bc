use std::fmt;

/// Failure of a CLI run, mapped to an exit code by [`CliError::exit_code`].
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config entries or parameter values.
    Usage(String),
    /// Argument parsing failure, including `--help` and `--version`.
    Clap(clap::Error),
    Numeric(necklace_core::Error),
    Io(std::io::Error),
    /// Verification ran and at least one criterion failed.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use necklace_core::Error as E;
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Usage(_) | CliError::Clap(_) => 2,
            CliError::Numeric(E::Domain(_) | E::Unsupported(_) | E::Precondition(_)) => 2,
            CliError::Numeric(_) | CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Clap(e)
    }
}

impl From<necklace_core::Error> for CliError {
    fn from(e: necklace_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
