use std::f64::consts::{LN_2, TAU};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{ChannelSet, SystemDims};
use crate::autodiff::{NodeId, Tape, Tensor};
use crate::error::Result;
use crate::optim::Problem;
use crate::transforms::{frobenius_power, unit_modulus};

/// Logarithm base of the rate objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogBase {
    /// Bits.
    #[default]
    Two,
    /// Nats.
    E,
}

impl LogBase {
    fn per_nat(self) -> f64 {
        match self {
            Self::Two => 1.0 / LN_2,
            Self::E => 1.0,
        }
    }
}

/// Leaf handles of the phase layer and the beamforming layer.
#[derive(Clone, Copy, Debug)]
pub struct BeamLeafNodes {
    /// Phase arguments, `[N]`.
    pub phi: NodeId,
    /// Real part of the unnormalized beamformer, `[M, K]`.
    pub wr: NodeId,
    /// Imaginary part of the unnormalized beamformer, `[M, K]`.
    pub wi: NodeId,
}

/// Records `L = -R` for the given channels.
///
/// Phase layer: `theta = e^{j phi}`, `H = Hr diag(theta) G`.
/// Beamforming layer: `W = W' sqrt(Pmax) / ||W'||_F`, then per-user SINR from
/// the gains `|H_k w_i|^2` and the sum of `log(1 + gamma_k)`.
pub fn loss_graph(tape: &mut Tape, channels: &ChannelSet, leaves: BeamLeafNodes, base: LogBase) -> Result<NodeId> {
    let k = channels.dims().k;

    let theta = unit_modulus(tape, leaves.phi)?;
    let reflect = tape.diag(theta)?;
    let hr = tape.constant(channels.hr.clone());
    let g = tape.constant(channels.g.clone());
    let hr_theta = tape.matmul(hr, reflect)?;
    let h = tape.matmul(hr_theta, g)?;

    let w = frobenius_power(tape, leaves.wr, leaves.wi, channels.pmax, None)?;
    let hw = tape.matmul(h, w)?;
    let gains = tape.abs2(hw)?;
    let signal = tape.diag_part(gains)?;

    let mut off_diag = vec![1.0; k * k];
    for i in 0..k {
        off_diag[i * k + i] = 0.0;
    }
    let mask = tape.constant(Tensor::matrix(k, k, off_diag)?);
    let cross = tape.mul(gains, mask)?;
    let interference = tape.reduce_sum(cross, Some(&[1]))?;
    let noise = tape.scalar(channels.sigma2);
    let denom = tape.add(interference, noise)?;

    let gamma = tape.div(signal, denom)?;
    let rates = tape.log1p(gamma)?;
    let total = tape.sum(rates)?;
    tape.scale(total, -base.per_nat())
}

/// The beamforming instance as a trainable [`Problem`].
///
/// Leaves: `phi` (`[N]`), `wr` and `wi` (`[M, K]`).
#[derive(Clone, Debug)]
pub struct BeamformingProblem {
    pub channels: ChannelSet,
    pub base: LogBase,
}

impl BeamformingProblem {
    pub fn new(channels: ChannelSet) -> Self {
        Self {
            channels,
            base: LogBase::Two,
        }
    }

    pub fn dims(&self) -> SystemDims {
        self.channels.dims()
    }
}

impl Problem for BeamformingProblem {
    fn leaf_shapes(&self) -> Vec<Vec<usize>> {
        let d = self.dims();
        vec![vec![d.n], vec![d.m, d.k], vec![d.m, d.k]]
    }

    fn build_loss(&self, tape: &mut Tape, leaves: &[NodeId]) -> Result<NodeId> {
        let nodes = BeamLeafNodes {
            phi: leaves[0],
            wr: leaves[1],
            wi: leaves[2],
        };
        loss_graph(tape, &self.channels, nodes, self.base)
    }

    /// Phases uniform on `[0, 2 pi)`, beamformer parts standard normal.
    fn random_init(&self, rng: &mut dyn RngCore) -> Vec<Tensor> {
        let d = self.dims();
        let phi = (0..d.n).map(|_| rng.random::<f64>() * TAU).collect();
        let mut normal = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
        let wr = normal(d.m * d.k);
        let wi = normal(d.m * d.k);
        vec![
            Tensor::vector(phi),
            Tensor::matrix(d.m, d.k, wr).expect("shape"),
            Tensor::matrix(d.m, d.k, wi).expect("shape"),
        ]
    }
}
