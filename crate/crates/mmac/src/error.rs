//! Error taxonomy shared by every module, with the CLI exit-code mapping.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structurally impossible setup: dimension mismatches, empty ranges,
    /// inconsistent grid definitions.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs that are well-formed but violate a documented precondition
    /// (non-Hermitian matrix, probability outside [0,1], ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed on data that passed validation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A Monte-Carlo evaluator produced NaN/Inf; the trial index is kept so
    /// the offending draw can be replayed from the master seed.
    #[error("trial {trial} produced a non-finite value")]
    NonFiniteTrial { trial: u64 },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI contract: 0 success, 2 validation/configuration/parse,
    /// 3 i/o, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Parse { .. } => 2,
            Error::Io { .. } => 3,
            Error::Numerical(_) | Error::NonFiniteTrial { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_cli_contract() {
        assert_eq!(Error::Config(String::new()).exit_code(), 2);
        assert_eq!(Error::Validation(String::new()).exit_code(), 2);
        assert_eq!(
            Error::Parse { path: "x.json".into(), message: String::new() }.exit_code(),
            2
        );
        assert_eq!(
            Error::io("out.csv", std::io::Error::other("disk full")).exit_code(),
            3
        );
        assert_eq!(Error::Numerical(String::new()).exit_code(), 4);
        assert_eq!(Error::NonFiniteTrial { trial: 7 }.exit_code(), 4);
    }
}
