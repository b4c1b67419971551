use num_complex::Complex64;

use super::{effective_channel, sum_rate, transmit_power, BeamformingProblem, ChannelSet};
use crate::autodiff::Tensor;
use crate::error::Result;
use crate::optim::{multi_restart, TrainConfig, TrainTrace};
use crate::transforms::{TransformSpec, POWER_TOL, UNIT_MODULUS_TOL};

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub train: TrainConfig,
    pub restarts: usize,
    pub seed: u64,
    /// Leaves `[phi, wr, wi]` from a previous, correlated instance.
    pub warm_start: Option<Vec<Tensor>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            restarts: 1,
            seed: 0,
            warm_start: None,
        }
    }
}

/// A feasible design and its sum rate, recomputed from the recovered
/// variables.
#[derive(Clone, Debug)]
pub struct Solution {
    pub theta: Vec<Complex64>,
    /// Beamformer, `M x K`.
    pub w: Tensor,
    /// Bits per channel use.
    pub sum_rate: f64,
    /// Trace of the winning run.
    pub trace: TrainTrace,
    /// Trained leaves `[phi, wr, wi]`, reusable as a warm start.
    pub leaves: Vec<Tensor>,
    /// Iterations summed over every run.
    pub total_iterations: usize,
}

impl Solution {
    /// Maps trained leaves back to `(theta, W)` and evaluates the rate.
    pub fn from_leaves(channels: &ChannelSet, leaves: &[Tensor], trace: TrainTrace) -> Result<Self> {
        let d = channels.dims();
        let theta = TransformSpec::UnitModulus { len: d.n }
            .recover(&leaves[..1])?
            .data()
            .to_vec();
        let w = TransformSpec::frobenius_power(d.m, d.k, channels.pmax, false)?.recover(&leaves[1..3])?;
        let h = effective_channel(&channels.g, &channels.hr, &theta)?;
        let rate = sum_rate(&h, &w, channels.sigma2)?;
        let total_iterations = trace.iterations_run();
        Ok(Self {
            theta,
            w,
            sum_rate: rate,
            trace,
            leaves: leaves.to_vec(),
            total_iterations,
        })
    }

    /// Unit-modulus phases and full use of the power budget.
    pub fn is_feasible(&self, pmax: f64) -> bool {
        self.theta.iter().all(|z| (z.norm() - 1.0).abs() < UNIT_MODULUS_TOL)
            && (transmit_power(&self.w) - pmax).abs() < POWER_TOL * pmax
    }
}

/// Trains a dedicated model for this channel realization and returns the
/// best design over all restarts.
pub fn solve(channels: &ChannelSet, config: &SolveConfig) -> Result<Solution> {
    let problem = BeamformingProblem::new(channels.clone());
    let outcome = multi_restart(
        &problem,
        &config.train,
        config.restarts,
        config.seed,
        config.warm_start.clone(),
    )?;
    let best = outcome.best();
    let mut solution = Solution::from_leaves(channels, &best.params, best.trace.clone())?;
    solution.total_iterations = outcome.total_iterations();
    Ok(solution)
}
