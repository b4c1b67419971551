//! Reference optima for small instances.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{effective_channel, mrt_beamformer, sum_rate, ChannelSet};
use crate::error::{Error, Result};

/// Largest surface the exhaustive phase search accepts.
pub const ORACLE_GRID_MAX_N: usize = 3;

/// Closed-form optimum for one antenna and one user.
///
/// The effective channel is `sum_n hr_n theta_n g_n`; aligning every phase
/// gives magnitude `sum_n |hr_n g_n|`, and full power is optimal.
pub fn oracle_k1_m1(channels: &ChannelSet) -> Result<f64> {
    let d = channels.dims();
    if d.k != 1 || d.m != 1 {
        return Err(Error::UnsupportedDims(format!("closed form needs K=1, M=1, got {d}")));
    }
    let aligned: f64 = (0..d.n)
        .map(|e| (channels.hr.at2(0, e) * channels.g.at2(e, 0)).norm())
        .sum();
    Ok((channels.pmax * aligned * aligned / channels.sigma2).ln_1p() / std::f64::consts::LN_2)
}

/// Exhaustive search over `grid` uniformly spaced phases per element, with
/// full-power maximum-ratio transmission for each candidate.
pub fn oracle_grid(channels: &ChannelSet, grid: usize) -> Result<f64> {
    let d = channels.dims();
    if d.k != 1 || d.n > ORACLE_GRID_MAX_N {
        return Err(Error::UnsupportedDims(format!(
            "grid search needs K=1 and N<={ORACLE_GRID_MAX_N}, got {d}"
        )));
    }
    if grid == 0 {
        return Err(Error::InvalidConfig("phase grid must have at least one point".into()));
    }
    let phases: Vec<Complex64> = (0..grid)
        .map(|i| Complex64::cis(TAU * i as f64 / grid as f64))
        .collect();
    let total = grid.pow(d.n as u32);
    let mut best = f64::NEG_INFINITY;
    let mut theta = vec![Complex64::new(1.0, 0.0); d.n];
    for code in 0..total {
        let mut rest = code;
        for t in theta.iter_mut() {
            *t = phases[rest % grid];
            rest /= grid;
        }
        let h = effective_channel(&channels.g, &channels.hr, &theta)?;
        let w = mrt_beamformer(&h, channels.pmax);
        best = best.max(sum_rate(&h, &w, channels.sigma2)?);
    }
    Ok(best)
}
