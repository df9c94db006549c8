use std::fmt;
use std::process::ExitCode;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: config, flags or violated hypotheses.
    Validation(String),
    /// The numerics failed on valid input.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
        })
    }

    /// Prefixes a config path onto library errors that carry none.
    pub fn at(path: &str, e: modspace::Error) -> Self {
        match e {
            modspace::Error::Config { path: inner, message } => {
                Self::Validation(format!("invalid configuration at `{path}.{inner}`: {message}"))
            }
            e if e.is_numerical() => Self::Numerical(e.to_string()),
            modspace::Error::Io(e) => Self::Io(e.to_string()),
            e => Self::Validation(format!("invalid configuration at `{path}`: {e}")),
        }
    }
}

impl From<modspace::Error> for CliError {
    fn from(e: modspace::Error) -> Self {
        match e {
            e if e.is_numerical() => Self::Numerical(e.to_string()),
            modspace::Error::Io(e) => Self::Io(e.to_string()),
            e => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}
