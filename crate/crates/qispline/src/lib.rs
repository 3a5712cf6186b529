//! Batch front-end for `qispline-core`: run configuration, subcommands and
//! machine-readable reports.

pub mod config;
pub mod formats;
pub mod run;

pub use config::{Command, Family, Format, Function, Kind, RunConfig};
pub use formats::{AuditRecord, Cell, CertificateStatus, OperatorRecord, StencilRecord, Table};
pub use run::run;

use qispline_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDegree { .. }
            | Error::InvalidInterval { .. }
            | Error::NonMonotoneKnots { .. }
            | Error::KnotOutsideInterval { .. }
            | Error::EmptyPartition
            | Error::InvalidParameter(_)
            | Error::StencilTooNarrow { .. }
            | Error::ExactnessTooHigh { .. }
            | Error::UnsupportedKind(_) => RunError::Config(e.to_string()),
            other => RunError::Numerical(other),
        }
    }
}
