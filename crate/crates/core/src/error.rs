// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::skeleton::ValidationReport;

pub type Result<T, E = RigError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RigError {
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(ValidationReport),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed token stream: {0}")]
    Codec(String),

    #[error("optimization diverged at iteration {iteration}: loss {loss:e} exceeds {limit:e}")]
    Diverged {
        iteration: usize,
        loss: f64,
        limit: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RigError {
    pub(crate) fn shape(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        RigError::ShapeMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        RigError::InvalidArgument(msg.into())
    }
}
