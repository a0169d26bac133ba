use thiserror::Error;

use crate::ext::ExtTable;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A graded piece that should be finite-dimensional is not. `ray` is a nonzero
    /// integer direction in degree space along which sections keep existing.
    #[error("infinite-dimensional graded piece: recession ray {ray:?}")]
    NonFinite { ray: Vec<i64> },

    #[error("route disagreement for {context}: formula {formula} vs koszul {koszul}")]
    OracleDisagreement {
        context: String,
        formula: ExtTable,
        koszul: ExtTable,
    },

    #[error("vector {vector:?} lies in the relative interiors of faces {first:?} and {second:?}")]
    AmbiguousCone {
        vector: Vec<String>,
        first: Vec<usize>,
        second: Vec<usize>,
    },

    #[error("vector {0:?} is not covered by the fan")]
    NotCovered(Vec<String>),

    #[error("pullback of weight {weight:?} is not integral at coordinate {coordinate} (value {value})")]
    NonIntegralPullback {
        weight: Vec<i64>,
        coordinate: usize,
        value: String,
    },

    #[error("adjunction solve did not converge up to twist radius {radius}")]
    WindowExhausted { radius: i64 },

    #[error("adjunction solve produced a non-integral class (max residual {residual})")]
    NonIntegralSolution { residual: String },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// Exit status class used by the command line tool: 2 for input errors,
    /// 3 for resource and finiteness errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. }
            | Error::InvalidComplex(_)
            | Error::Dimension(_)
            | Error::AmbiguousCone { .. }
            | Error::NotCovered(_) => 2,
            Error::NonFinite { .. }
            | Error::Overflow(_)
            | Error::Io(_)
            | Error::WindowExhausted { .. }
            | Error::NonIntegralSolution { .. }
            | Error::NonIntegralPullback { .. } => 3,
            Error::OracleDisagreement { .. } => 1,
        }
    }
}
