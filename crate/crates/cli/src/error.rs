//! CLI errors mapped to process exit codes.

use ragd::GeoError;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: bad configuration or arguments.
    Config(String),
    /// Exit code 3: numerical failure during a run.
    Numerical(String),
    /// Exit code 4: a verified inequality or check was violated.
    Violation(String),
}

impl CliError {
    pub fn config(e: GeoError) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn numerical(e: GeoError) -> Self {
        CliError::Numerical(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Violation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Violation(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("io error: {e}"))
    }
}
