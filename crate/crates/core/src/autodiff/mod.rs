//! Reverse-mode automatic differentiation over real and complex tensors.
//!
//! Trainable leaves are always real; complex variables are built from real
//! leaves (see [`Tape::complex`] and [`Tape::cis`]). The loss must be a real
//! scalar.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, grad_check_with_floor, GRAD_CHECK_FLOOR};
pub use tape::{sigmoid, BinaryKind, Gradients, NodeId, Tape, UnaryKind};
pub use tensor::{DType, Tensor};
