use thiserror::Error;

use crate::polyalg::CovSymbol;
use crate::Index;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("the doublet construction needs at least two doublets, got {0}")]
    SchemeTooSmall(usize),

    #[error("index {0} is not mapped by the relabeling")]
    UnmappedIndex(Index),

    #[error("indices must be positive, got 0")]
    ZeroIndex,

    #[error("a cumulant needs at least one argument")]
    EmptyQuery,

    #[error("a cumulant argument must contain at least one index")]
    EmptyGroup,

    #[error("total order {order} exceeds the configured limit of {limit}")]
    OrderLimit { order: usize, limit: usize },

    #[error("index {index} appears more than once; the check needs distinct indices")]
    DuplicateIndex { index: Index },

    #[error("symbol {symbol} refers past the {dim}x{dim} covariance matrix")]
    SymbolOutOfRange { symbol: CovSymbol, dim: usize },

    #[error("index {index} refers past the {dim}x{dim} covariance matrix")]
    IndexOutOfRange { index: Index, dim: usize },

    #[error("covariance matrix: {0}")]
    InvalidMatrix(String),

    #[error("covariance matrix is not positive semi-definite (pivot {pivot:e} at row {row})")]
    NotPsd { row: usize, pivot: f64 },

    #[error("Monte Carlo needs at least one sample")]
    NoSamples,
}
