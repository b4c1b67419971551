use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_shapes, evaluate, OptimizerConfig, Problem, StopDecision, StopReason, StopRule};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub patience: usize,
    pub max_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::Adam { lr: 0.1 },
            patience: super::DEFAULT_PATIENCE,
            max_iters: super::DEFAULT_MAX_ITERS,
        }
    }
}

impl TrainConfig {
    pub fn stop_rule(&self) -> StopRule {
        StopRule::new(self.patience, self.max_iters)
    }
}

/// Loss history of one training run.
///
/// `losses[i]` is the loss after the `i + 1`-th optimizer step; the loss at
/// the starting point is kept separately in `initial_loss`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub initial_loss: f64,
    pub losses: Vec<f64>,
    pub stop_reason: Option<StopReason>,
}

impl TrainTrace {
    pub fn iterations_run(&self) -> usize {
        self.losses.len()
    }

    /// Minimum over the starting point and every iterate.
    pub fn best_loss(&self) -> f64 {
        self.losses.iter().copied().fold(self.initial_loss, f64::min)
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    /// Leaves at the lowest loss seen, not the final iterate.
    pub params: Vec<Tensor>,
    pub loss: f64,
    pub trace: TrainTrace,
}

/// Trains `init` until the stop rule fires and returns the best iterate.
pub fn train<P: Problem + ?Sized>(problem: &P, init: Vec<Tensor>, config: &TrainConfig) -> Result<TrainResult> {
    check_shapes(problem, &init)?;
    let mut params = init;
    let (initial_loss, mut grads) = evaluate(problem, &params)?;
    let mut trace = TrainTrace {
        initial_loss,
        losses: Vec::new(),
        stop_reason: None,
    };
    if !initial_loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: 0,
            trace: Box::new(trace),
        });
    }

    let mut rule = config.stop_rule();
    rule.prime(initial_loss);
    let mut best_loss = initial_loss;
    let mut best_params = params.clone();
    let mut optimizer = config.optimizer.build(&params);

    if config.max_iters == 0 {
        trace.stop_reason = Some(StopReason::MaxIters);
    }
    while trace.stop_reason.is_none() {
        optimizer.step(&mut params, &grads)?;
        let (loss, next_grads) = evaluate(problem, &params)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: trace.losses.len() + 1,
                trace: Box::new(trace),
            });
        }
        trace.losses.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best_params.clone_from(&params);
        }
        if let StopDecision::Stop(reason) = rule.observe(loss) {
            trace.stop_reason = Some(reason);
        }
        grads = next_grads;
    }

    Ok(TrainResult {
        params: best_params,
        loss: best_loss,
        trace,
    })
}

/// Generator for fresh restart `index` under `seed`.
///
/// Each restart draws from its own ChaCha stream, so the first `k` runs of a
/// seed are the same whatever the total number of restarts.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

#[derive(Clone, Debug)]
pub struct RestartOutcome {
    /// Warm start first (when given), then fresh runs in index order.
    pub runs: Vec<TrainResult>,
    pub warm_started: bool,
}

impl RestartOutcome {
    /// Index of the lowest-loss run; ties go to the earlier run.
    pub fn best_index(&self) -> usize {
        self.best_index_of_first(self.runs.len())
    }

    pub fn best(&self) -> &TrainResult {
        &self.runs[self.best_index()]
    }

    /// Best among the first `count` runs.
    pub fn best_index_of_first(&self, count: usize) -> usize {
        let count = count.clamp(1, self.runs.len());
        let mut best = 0;
        for i in 1..count {
            if self.runs[i].loss < self.runs[best].loss {
                best = i;
            }
        }
        best
    }

    pub fn total_iterations(&self) -> usize {
        self.runs.iter().map(|r| r.trace.iterations_run()).sum()
    }
}

/// Runs `restarts` trainings from random starting points, plus the warm
/// start as run 0 when given. Runs execute in parallel; the outcome does not
/// depend on scheduling.
pub fn multi_restart<P: Problem + ?Sized>(
    problem: &P,
    config: &TrainConfig,
    restarts: usize,
    seed: u64,
    warm_start: Option<Vec<Tensor>>,
) -> Result<RestartOutcome> {
    if restarts == 0 && warm_start.is_none() {
        return Err(Error::InvalidConfig("at least one restart is required".into()));
    }
    let warm_started = warm_start.is_some();
    let mut inits: Vec<Vec<Tensor>> = warm_start.into_iter().collect();
    inits.extend((0..restarts).map(|i| problem.random_init(&mut restart_rng(seed, i))));

    let runs = inits
        .into_par_iter()
        .map(|init| train(problem, init, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(RestartOutcome { runs, warm_started })
}
