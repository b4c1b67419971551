use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netopt::beamforming::{effective_channel, mrt_beamformer, sum_rate, ChannelSet};
use netopt::{Error, Tensor};

/// ChaCha stream reserved for the baseline, disjoint from every restart stream.
const BASELINE_STREAM: u64 = u64::MAX;

/// Generator for the baseline draws of scenario `seed`.
pub fn baseline_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BASELINE_STREAM);
    rng
}

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub theta: Vec<Complex64>,
    pub w: Tensor,
    pub sum_rate: f64,
}

/// Best of `samples` uniformly random phase vectors, each paired with
/// full-power MRT on the resulting effective channel.
pub fn baseline_random_mrt<R: Rng + ?Sized>(
    channels: &ChannelSet,
    samples: usize,
    rng: &mut R,
) -> netopt::Result<BaselineResult> {
    if samples == 0 {
        return Err(Error::InvalidConfig("baseline needs at least one sample".into()));
    }
    let n = channels.dims().n;
    let mut best: Option<BaselineResult> = None;
    for _ in 0..samples {
        let theta: Vec<Complex64> = (0..n).map(|_| Complex64::cis(rng.random::<f64>() * TAU)).collect();
        let h = effective_channel(&channels.g, &channels.hr, &theta)?;
        let w = mrt_beamformer(&h, channels.pmax);
        let rate = sum_rate(&h, &w, channels.sigma2)?;
        if best.as_ref().is_none_or(|b| rate > b.sum_rate) {
            best = Some(BaselineResult {
                theta,
                w,
                sum_rate: rate,
            });
        }
    }
    Ok(best.expect("samples >= 1"))
}

#[cfg(test)]
mod tests {
    use netopt::beamforming::{oracle_k1_m1, transmit_power, SystemDims};
    use netopt::channels::ScenarioConfig;

    use super::*;

    fn channels(m: usize, k: usize, n: usize, seed: u64) -> ChannelSet {
        ScenarioConfig::new(SystemDims::new(m, k, n).unwrap(), seed)
            .generate()
            .unwrap()
            .channels
    }

    #[test]
    fn single_element_single_user_is_optimal() {
        for seed in 0..5 {
            let ch = channels(1, 1, 1, seed);
            let got = baseline_random_mrt(&ch, 1, &mut baseline_rng(seed)).unwrap();
            let want = oracle_k1_m1(&ch).unwrap();
            assert!((got.sum_rate - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn more_samples_never_hurt() {
        let ch = channels(4, 2, 16, 3);
        let mut last = f64::NEG_INFINITY;
        for samples in [1, 2, 4, 8, 32] {
            let r = baseline_random_mrt(&ch, samples, &mut baseline_rng(3))
                .unwrap()
                .sum_rate;
            assert!(r >= last);
            last = r;
        }
    }

    #[test]
    fn result_is_feasible() {
        let ch = channels(4, 3, 8, 1);
        let r = baseline_random_mrt(&ch, 4, &mut baseline_rng(1)).unwrap();
        assert!(r.theta.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!((transmit_power(&r.w) - ch.pmax).abs() < 1e-9 * ch.pmax);
        let h = effective_channel(&ch.g, &ch.hr, &r.theta).unwrap();
        assert_eq!(sum_rate(&h, &r.w, ch.sigma2).unwrap(), r.sum_rate);
        assert!(baseline_random_mrt(&ch, 0, &mut baseline_rng(1)).is_err());
    }
}
