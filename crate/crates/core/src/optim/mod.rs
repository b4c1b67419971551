//! Per-instance training: the optimization variables are the trainable
//! leaves of a [`Problem`], the objective is its loss, and solving the
//! problem means training those leaves to convergence.

mod adam;
mod stop;
mod train;

use rand::RngCore;

pub use adam::{AdamState, Optimizer, OptimizerConfig, Sgd, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use stop::{StopDecision, StopReason, StopRule, DEFAULT_MAX_ITERS, DEFAULT_PATIENCE};
pub use train::{multi_restart, restart_rng, train, RestartOutcome, TrainConfig, TrainResult, TrainTrace};

use crate::autodiff::{NodeId, Tape, Tensor};
use crate::error::{Error, Result};

/// An optimization instance expressed as a loss graph over real leaves.
///
/// Maximization problems return the negated objective.
pub trait Problem: Sync {
    /// Shapes of the trainable leaves.
    fn leaf_shapes(&self) -> Vec<Vec<usize>>;

    /// Records the loss on `tape`, given one node per leaf shape.
    fn build_loss(&self, tape: &mut Tape, leaves: &[NodeId]) -> Result<NodeId>;

    /// Draws a random starting point.
    fn random_init(&self, rng: &mut dyn RngCore) -> Vec<Tensor>;
}

/// One forward and backward pass: the loss and its gradient per leaf.
pub fn evaluate<P: Problem + ?Sized>(problem: &P, params: &[Tensor]) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let leaves = params
        .iter()
        .map(|p| tape.leaf(p.clone(), true))
        .collect::<Result<Vec<_>>>()?;
    let loss = problem.build_loss(&mut tape, &leaves)?;
    let value = tape
        .value(loss)?
        .item()
        .ok_or_else(|| Error::NotScalar(tape.value(loss).map(|t| t.shape().to_vec()).unwrap_or_default()))?
        .re;
    let grads = tape.backward(loss)?.into_ordered(&leaves);
    Ok((value, grads))
}

/// Loss value only, without recording gradients.
pub fn loss_value<P: Problem + ?Sized>(problem: &P, params: &[Tensor]) -> Result<f64> {
    let mut tape = Tape::new();
    let leaves: Vec<NodeId> = params.iter().map(|p| tape.constant(p.clone())).collect();
    let loss = problem.build_loss(&mut tape, &leaves)?;
    tape.value(loss)?.item().map(|z| z.re).ok_or(Error::NonFinite("loss"))
}

pub(crate) fn check_shapes<P: Problem + ?Sized>(problem: &P, params: &[Tensor]) -> Result<()> {
    let want = problem.leaf_shapes();
    let got: Vec<Vec<usize>> = params.iter().map(|p| p.shape().to_vec()).collect();
    if want != got {
        return Err(Error::InvalidConfig(format!(
            "initial leaves have shapes {got:?}, problem expects {want:?}"
        )));
    }
    Ok(())
}
