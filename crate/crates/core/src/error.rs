use thiserror::Error;

use crate::syntax::Element;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("symbol `{0}` has arity 0; declare it as a constant instead")]
    ZeroArity(String),
    #[error("symbol `{0}` is used with different arities")]
    InconsistentArity(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Lexical or grammatical error.
    Syntax(String),
    UnknownSymbol(String),
    ArityMismatch { symbol: String, expected: usize, found: usize },
}

/// A formula parse failure at a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at offset {offset}", describe(kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => format!("syntax error: {msg}"),
        ParseErrorKind::UnknownSymbol(s) => format!("unknown symbol `{s}`"),
        ParseErrorKind::ArityMismatch { symbol, expected, found } => {
            format!("`{symbol}` expects {expected} argument(s), found {found}")
        }
    }
}

impl ParseError {
    pub(crate) fn syntax(msg: impl Into<String>, offset: usize) -> Self {
        Self { kind: ParseErrorKind::Syntax(msg.into()), offset }
    }
}

/// Errors raised while building a structure or running queries and evaluation against it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("element {0} is not in the universe")]
    ElementOutsideUniverse(Element),
    #[error("universe must be a non-empty set of distinct elements")]
    BadUniverse,
    #[error("no oracle given for symbol `{0}`")]
    MissingOracle(String),
    #[error("constant `{0}` has no interpretation")]
    MissingConstant(String),
    #[error("oracle for `{symbol}`: {message}")]
    BadOracle { symbol: String, message: String },
    #[error("state does not match the structure's shape")]
    ShapeMismatch,
    #[error("point {point} appears twice in the sequence of `{symbol}`")]
    DuplicatePoint { symbol: String, point: String },
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("formula `{0}` is not closed")]
    OpenFormula(String),
    #[error("bad state literal at offset {offset}: {message}")]
    BadStateLiteral { offset: usize, message: String },
    #[error("state space has {0} states, too many to enumerate")]
    StateSpaceTooLarge(u128),
}

/// Structure-spec file loading failure, with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LoadError {
    pub line: usize,
    pub message: String,
}

impl LoadError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}
