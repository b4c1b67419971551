use serde::{Deserialize, Serialize};

pub const DEFAULT_PATIENCE: usize = 25;
pub const DEFAULT_MAX_ITERS: usize = 5000;

/// Improvements smaller than this fraction of the running best do not count.
const REL_IMPROVEMENT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxIters,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Patience => "patience",
            Self::MaxIters => "max_iters",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop(StopReason),
}

/// Stops once the loss has gone `patience` consecutive iterations without
/// improving its running minimum, or after `max_iters` iterations.
#[derive(Clone, Debug)]
pub struct StopRule {
    pub patience: usize,
    pub max_iters: usize,
    best_loss: f64,
    stall_count: usize,
    iterations: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self::new(DEFAULT_PATIENCE, DEFAULT_MAX_ITERS)
    }
}

impl StopRule {
    pub fn new(patience: usize, max_iters: usize) -> Self {
        Self {
            patience,
            max_iters,
            best_loss: f64::INFINITY,
            stall_count: 0,
            iterations: 0,
        }
    }

    /// Seeds the running best with the loss at the starting point without
    /// counting an iteration.
    pub fn prime(&mut self, loss: f64) {
        self.best_loss = loss;
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }

    pub fn stall_count(&self) -> usize {
        self.stall_count
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Records one iteration's loss.
    pub fn observe(&mut self, loss: f64) -> StopDecision {
        self.iterations += 1;
        let margin = REL_IMPROVEMENT * self.best_loss.abs();
        if self.best_loss.is_infinite() || loss < self.best_loss - margin {
            self.best_loss = loss;
            self.stall_count = 0;
        } else {
            self.stall_count += 1;
        }
        if self.stall_count >= self.patience {
            StopDecision::Stop(StopReason::Patience)
        } else if self.iterations >= self.max_iters {
            StopDecision::Stop(StopReason::MaxIters)
        } else {
            StopDecision::Continue
        }
    }
}
