use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("interval corner out of order on axis {axis}: a > b")]
    UnorderedCorners { axis: usize },

    #[error("zero max side: regularity undefined for a degenerate interval")]
    ZeroMaxSide,

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown preset {name:?}; available: {}", available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("pole: {0}")]
    Pole(String),

    #[error("cantor evaluation needs more than {cap} ternary digits")]
    CantorDepth { cap: usize },

    #[error("capacity exceeded: {what} needs {count}, cap is {cap}")]
    Capacity {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("interval {index} violates the regularity threshold {threshold}")]
    Regularity { index: usize, threshold: String },

    #[error("family is not pairwise disjoint: intervals {first} and {second} meet")]
    NotDisjoint { first: usize, second: usize },

    #[error("not a witness pair: {0}")]
    NotWitnessPair(String),

    #[error("method does not apply: {0}")]
    MethodMismatch(String),

    #[error("depth too small: requested level {requested}, built depth {depth}")]
    DepthTooSmall { requested: usize, depth: usize },

    #[error("all cells excluded: {0}")]
    NoCells(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
