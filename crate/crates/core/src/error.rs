use thiserror::Error;

use crate::optim::TrainTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { len: usize, shape: Vec<usize> },

    #[error("{op}: expected a real tensor")]
    NotReal { op: &'static str },

    #[error("trainable leaves must be real-valued")]
    ComplexTrainable,

    #[error("loss must be a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),

    #[error("axis {axis} out of range for rank {rank}")]
    InvalidAxis { axis: usize, rank: usize },

    #[error("{op}: division by exact zero")]
    DivisionByZero { op: &'static str },

    #[error("{op}: argument outside the domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("node {0} does not belong to this tape")]
    UnknownNode(usize),

    #[error("tape already ran its backward pass; reset it before reuse")]
    TapeSpent,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("non-finite gradient for leaf {leaf}")]
    NonFiniteGradient { leaf: usize },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, trace: Box<TrainTrace> },

    #[error("invalid transform parameters: {0}")]
    InvalidTransform(String),

    #[error("matrix is rank deficient: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimensions not supported: {0}")]
    UnsupportedDims(String),

    #[error("scenario file: {0}")]
    Scenario(#[from] serde_json::Error),
}
