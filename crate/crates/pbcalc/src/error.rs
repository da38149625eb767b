//! Error type shared by every module of the crate.

use thiserror::Error;

/// All failures the library can report.
#[derive(Debug, Error)]
pub enum Error {
    /// Syntax error while reading a formula, branch, or structure file.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A symbol used in a formula is not declared in the signature.
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    /// A symbol is applied to the wrong number of arguments.
    #[error("arity mismatch for `{symbol}`: expected {expected}, got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },

    /// A quantifier bound parsed from user input is negative.
    #[error("negative quantifier bound {0}")]
    NegativeBound(String),

    /// An index-domain request cannot be satisfied.
    #[error("domain error: {0}")]
    Domain(String),

    /// A template could not be instantiated to a ground formula.
    #[error("template error: {0}")]
    Template(String),

    /// Evaluation failed (non-ground formula, missing assignment, table
    /// gap, or an infinitary node reaching the evaluator).
    #[error("evaluation error: {0}")]
    Eval(String),

    /// A branch does not match the shape of the formula it indexes.
    #[error("branch shape error: {0}")]
    BranchShape(String),

    /// A finite branch or enumeration ran out of data.
    #[error("exhausted: {0}")]
    Exhausted(String),

    /// A structure file or structure value is malformed.
    #[error("structure error: {0}")]
    Structure(String),

    /// An operation requires exact arithmetic the value carrier cannot
    /// provide (for example non-integer exponents).
    #[error("exactness restriction: {0}")]
    Exactness(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for a parse error.
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }
}
