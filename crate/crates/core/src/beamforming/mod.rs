//! Joint IRS phase-shift and transmit beamforming for multi-user MISO
//! downlink through an intelligent reflecting surface.
//!
//! A base station with `M` antennas serves `K` single-antenna users over a
//! reflecting surface with `N` elements; the direct links are blocked. The
//! effective channel is `H = Hr diag(theta) G` and the objective is the sum
//! rate `sum_k log2(1 + gamma_k)` under a total power budget and unit-modulus
//! phase shifts.

mod graph;
mod oracle;
mod solve;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use graph::{loss_graph, BeamLeafNodes, BeamformingProblem, LogBase};
pub use oracle::{oracle_grid, oracle_k1_m1, ORACLE_GRID_MAX_N};
pub use solve::{solve, Solution, SolveConfig};

use crate::autodiff::{DType, Tensor};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemDims {
    /// Base-station antennas.
    pub m: usize,
    /// Single-antenna users.
    pub k: usize,
    /// Reflecting elements.
    pub n: usize,
}

impl SystemDims {
    pub fn new(m: usize, k: usize, n: usize) -> Result<Self> {
        if m == 0 || k == 0 || n == 0 {
            return Err(Error::InvalidConfig(format!(
                "dimensions must be positive, got M={m} K={k} N={n}"
            )));
        }
        Ok(Self { m, k, n })
    }

    /// Trainable real scalars: `N` phases and `2MK` beamformer parts.
    pub fn num_leaves(&self) -> usize {
        self.n + 2 * self.m * self.k
    }
}

impl std::fmt::Display for SystemDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "M={} K={} N={}", self.m, self.k, self.n)
    }
}

/// One problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// BS-to-IRS channel, `N x M`.
    pub g: Tensor,
    /// IRS-to-user channels, `K x N`, row `k` is user `k`.
    pub hr: Tensor,
    /// Noise variance (linear).
    pub sigma2: f64,
    /// Transmit power budget (linear).
    pub pmax: f64,
}

impl ChannelSet {
    pub fn new(g: Tensor, hr: Tensor, sigma2: f64, pmax: f64) -> Result<Self> {
        if g.rank() != 2 || hr.rank() != 2 || hr.shape()[1] != g.shape()[0] {
            return Err(Error::ShapeMismatch {
                op: "channel set",
                lhs: hr.shape().to_vec(),
                rhs: g.shape().to_vec(),
            });
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) || !(pmax > 0.0 && pmax.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise variance {sigma2} and power budget {pmax} must be positive"
            )));
        }
        if !g.all_finite() || !hr.all_finite() {
            return Err(Error::NonFinite("channel"));
        }
        let to_complex = |t: Tensor| match t.dtype() {
            DType::Complex => t,
            DType::Real => Tensor::complex(t.shape().to_vec(), t.data().to_vec()).expect("same shape"),
        };
        let set = Self {
            g: to_complex(g),
            hr: to_complex(hr),
            sigma2,
            pmax,
        };
        SystemDims::new(set.g.shape()[1], set.hr.shape()[0], set.g.shape()[0])?;
        Ok(set)
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims {
            m: self.g.shape()[1],
            k: self.hr.shape()[0],
            n: self.g.shape()[0],
        }
    }

    /// Transmit SNR `pmax / sigma2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.pmax / self.sigma2).log10()
    }
}

/// `H = Hr diag(theta) G`, computed entry by entry.
pub fn effective_channel(g: &Tensor, hr: &Tensor, theta: &[C]) -> Result<Tensor> {
    let (n, m) = (g.shape()[0], g.shape()[1]);
    let k = hr.shape()[0];
    if hr.shape()[1] != n || theta.len() != n {
        return Err(Error::ShapeMismatch {
            op: "effective_channel",
            lhs: hr.shape().to_vec(),
            rhs: vec![theta.len(), n, m],
        });
    }
    let mut h = vec![C::new(0.0, 0.0); k * m];
    for user in 0..k {
        for ant in 0..m {
            h[user * m + ant] = (0..n).map(|e| hr.at2(user, e) * theta[e] * g.at2(e, ant)).sum();
        }
    }
    Tensor::complex(vec![k, m], h)
}

/// `|H_k w_i|^2` for every user `k` and beam `i`.
fn gains(h: &Tensor, w: &Tensor) -> Result<Vec<Vec<f64>>> {
    let (k, m) = (h.shape()[0], h.shape()[1]);
    if w.shape() != [m, k] {
        return Err(Error::ShapeMismatch {
            op: "sinr",
            lhs: h.shape().to_vec(),
            rhs: w.shape().to_vec(),
        });
    }
    Ok((0..k)
        .map(|user| {
            (0..k)
                .map(|beam| {
                    (0..m)
                        .map(|ant| h.at2(user, ant) * w.at2(ant, beam))
                        .sum::<C>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect())
}

/// SINR of user `k` (0-based).
pub fn sinr(h: &Tensor, w: &Tensor, sigma2: f64, k: usize) -> Result<f64> {
    let gains = gains(h, w)?;
    let row = gains
        .get(k)
        .ok_or_else(|| Error::InvalidConfig(format!("user index {k} out of range for K={}", gains.len())))?;
    let interference: f64 = row.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, g)| g).sum();
    Ok(row[k] / (sigma2 + interference))
}

/// Sum rate in bits per channel use.
pub fn sum_rate(h: &Tensor, w: &Tensor, sigma2: f64) -> Result<f64> {
    let gains = gains(h, w)?;
    Ok(gains
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let interference: f64 = row.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, g)| g).sum();
            (row[k] / (sigma2 + interference)).ln_1p()
        })
        .sum::<f64>()
        / std::f64::consts::LN_2)
}

/// Maximum-ratio transmission with equal per-user power: `w_k ∝ H_k^H`.
pub fn mrt_beamformer(h: &Tensor, pmax: f64) -> Tensor {
    let (k, m) = (h.shape()[0], h.shape()[1]);
    let per_user = (pmax / k as f64).sqrt();
    let mut w = vec![C::new(0.0, 0.0); m * k];
    for user in 0..k {
        let norm = (0..m).map(|a| h.at2(user, a).norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for ant in 0..m {
            w[ant * k + user] = h.at2(user, ant).conj() * (per_user / norm);
        }
    }
    Tensor::complex(vec![m, k], w).expect("shape by construction")
}

/// Total radiated power `sum_k ||w_k||^2`.
pub fn transmit_power(w: &Tensor) -> f64 {
    w.data().iter().map(|z| z.norm_sqr()).sum()
}
