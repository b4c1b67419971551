//! Constrained optimization by per-instance gradient training.
//!
//! Optimization variables become trainable leaves of a small computation
//! graph, constraints are removed by differentiable reparameterizations
//! ([`transforms`]), and the objective becomes the loss minimized by Adam or
//! plain gradient descent ([`optim`]). The [`beamforming`] module applies
//! this to joint IRS phase-shift and transmit beamforming design, with
//! scenarios drawn by [`channels`].

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod beamforming;
pub mod channels;
pub mod error;
pub mod optim;
pub mod transforms;

pub use autodiff::{DType, Gradients, NodeId, Tape, Tensor};
pub use beamforming::{solve, ChannelSet, Solution, SolveConfig, SystemDims};
pub use channels::{PathlossMode, Scenario, ScenarioConfig, ScenarioFile};
pub use error::{Error, Result};
pub use optim::{OptimizerConfig, Problem, TrainConfig, TrainTrace};
pub use transforms::TransformSpec;
