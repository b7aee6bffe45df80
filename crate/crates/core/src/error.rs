use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("attribute `{attribute}` has no value `{value}`")]
    UnknownValue { attribute: String, value: String },

    #[error("attribute `{attribute}`: value `{value}` has no code and no default group")]
    Uncoded { attribute: String, value: String },

    #[error("attribute `{attribute}`: {reason}")]
    Forbidden { attribute: String, reason: String },

    #[error("attribute `{attribute}`: {message}")]
    Schema { attribute: String, message: String },

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("dataset has no target attribute")]
    NoTarget,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable identifier, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownAttribute(_) => "unknown_attribute",
            Error::UnknownValue { .. } => "unknown_value",
            Error::Uncoded { .. } => "uncoded_value",
            Error::Forbidden { .. } => "forbidden_operation",
            Error::Schema { .. } => "schema_violation",
            Error::Row { .. } => "malformed_row",
            Error::NoTarget => "no_target",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Attribute the error refers to, when there is one.
    pub fn attribute(&self) -> Option<&str> {
        match self {
            Error::UnknownAttribute(a) => Some(a),
            Error::UnknownValue { attribute, .. }
            | Error::Uncoded { attribute, .. }
            | Error::Forbidden { attribute, .. }
            | Error::Schema { attribute, .. } => Some(attribute),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&str> {
        match self {
            Error::UnknownValue { value, .. } | Error::Uncoded { value, .. } => Some(value),
            _ => None,
        }
    }

    pub(crate) fn schema(attribute: &str, message: impl Into<String>) -> Self {
        Error::Schema {
            attribute: attribute.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
