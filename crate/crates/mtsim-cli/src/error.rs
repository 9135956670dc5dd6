//! CLI error type with the exit-code convention: 2 for usage problems
//! (flags, files, malformed input), 3 for numeric/model failures inside the
//! library.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unusable input: exits with code 2.
    Usage(String),
    /// Domain or model failure reported by the library: exits with code 3.
    Numeric(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<mtsim::Error> for CliError {
    fn from(e: mtsim::Error) -> Self {
        match e {
            mtsim::Error::Usage(_) => CliError::Usage(e.to_string()),
            mtsim::Error::Domain(_) | mtsim::Error::Model(_) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
