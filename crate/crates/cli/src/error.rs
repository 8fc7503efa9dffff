use std::fmt;

/// Failure of a CLI command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration: exit 2.
    Config(String),
    /// A numerical routine failed: exit 3.
    Numeric(String),
    /// A verification or scattering verdict came out negative: exit 1.
    Verification(String),
    /// Writing output failed: exit 3.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bcn_core::Error> for CliError {
    fn from(e: bcn_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
