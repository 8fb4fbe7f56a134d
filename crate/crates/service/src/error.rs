use serde::Serialize;
use thiserror::Error;

use npmt::parser::InferError;
use npmt::{LoadError, ModelError, ParseError, ParseErrorKind, SearchError};

/// Error surfaced to CLI users and HTTP clients. Serializes as
/// `{code, message, position?}`; `position` is a byte offset into the
/// offending formula or state literal.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{message}")]
pub struct ServiceError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl ServiceError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), position: None }
    }

    pub fn at(mut self, position: usize) -> Self {
        self.position = Some(position);
        self
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new("unknown_session", format!("no session `{id}`"))
    }

    pub fn io(err: std::io::Error) -> Self {
        Self::new("io_error", err.to_string())
    }
}

impl From<ParseError> for ServiceError {
    fn from(e: ParseError) -> Self {
        let code = match e.kind {
            ParseErrorKind::Syntax(_) => "syntax_error",
            ParseErrorKind::UnknownSymbol(_) => "unknown_symbol",
            ParseErrorKind::ArityMismatch { .. } => "arity_mismatch",
        };
        Self::new(code, e.to_string()).at(e.offset)
    }
}

impl From<LoadError> for ServiceError {
    fn from(e: LoadError) -> Self {
        Self::new("invalid_spec", e.to_string())
    }
}

impl From<ModelError> for ServiceError {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::UnknownSymbol(_) => "unknown_symbol",
            ModelError::ArityMismatch { .. } => "arity_mismatch",
            ModelError::ElementOutsideUniverse(_) => "element_outside_universe",
            ModelError::OpenFormula(_) | ModelError::UnboundVariable(_) => "open_formula",
            ModelError::BadStateLiteral { offset, .. } => return Self::new("bad_state", e.to_string()).at(*offset),
            ModelError::DuplicatePoint { .. } | ModelError::ShapeMismatch => "bad_state",
            ModelError::StateSpaceTooLarge(_) => "too_large",
            _ => "invalid_structure",
        };
        Self::new(code, e.to_string())
    }
}

impl From<SearchError> for ServiceError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::OpenFormula(_) => Self::new("open_formula", e.to_string()),
            SearchError::InvalidBounds(_) => Self::new("invalid_bounds", e.to_string()),
            SearchError::Signature(_) => Self::new("invalid_signature", e.to_string()),
            SearchError::Model(m) => m.into(),
        }
    }
}

impl From<InferError> for ServiceError {
    fn from(e: InferError) -> Self {
        match e {
            InferError::Parse { index, source } => {
                let inner = ServiceError::from(source);
                Self { message: format!("formula {}: {}", index + 1, inner.message), ..inner }
            }
            InferError::Signature(s) => Self::new("invalid_signature", s.to_string()),
        }
    }
}
