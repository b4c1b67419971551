//! Rician scenario generator for the beamforming instance.
//!
//! `G = L1 (sqrt(eps/(eps+1)) a_N(nu) a_M(phi)^H + sqrt(1/(eps+1)) G_nlos)` and
//! `h_k = L2k (sqrt(eps/(eps+1)) a_N(zeta_k) + sqrt(1/(eps+1)) h_nlos_k)`, with
//! NLOS entries drawn from CN(0, 1) and path loss `35.6 + 22 log10(d)` dB
//! applied as an amplitude factor.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::beamforming::{ChannelSet, SystemDims};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossMode {
    /// Noise is scaled by the squared path-loss product of the BS-IRS link
    /// and an IRS-user link at the ring centre, so `tx_snr_db` is the SNR
    /// after path loss.
    #[default]
    Normalized,
    /// `tx_snr_db` is `Pmax / sigma2` at the transmitter.
    Absolute,
}

impl std::str::FromStr for PathlossMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(Self::Normalized),
            "absolute" => Ok(Self::Absolute),
            other => Err(format!("unknown path-loss mode `{other}` (normalized|absolute)")),
        }
    }
}

impl PathlossMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normalized => "normalized",
            Self::Absolute => "absolute",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub dims: SystemDims,
    /// Rician factor; `f64::INFINITY` gives pure line of sight.
    pub rician_eps: f64,
    pub d_bs_irs: f64,
    /// Distance from the IRS to the centre of the user disk.
    pub user_ring_distance: f64,
    pub user_ring_radius: f64,
    /// `Pmax / sigma2` in dB.
    pub tx_snr_db: f64,
    pub pathloss_mode: PathlossMode,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(dims: SystemDims, seed: u64) -> Self {
        Self {
            dims,
            rician_eps: 10.0,
            d_bs_irs: 200.0,
            user_ring_distance: 30.0,
            user_ring_radius: 10.0,
            tx_snr_db: 20.0,
            pathloss_mode: PathlossMode::Normalized,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SystemDims::new(self.dims.m, self.dims.k, self.dims.n)?;
        if !(self.d_bs_irs > 0.0) || !(self.user_ring_distance > 0.0) || !(self.user_ring_radius >= 0.0) {
            return Err(Error::InvalidConfig("distances must be positive".into()));
        }
        if self.user_ring_radius >= self.user_ring_distance {
            return Err(Error::InvalidConfig("user disk must not contain the IRS".into()));
        }
        if !(self.rician_eps >= 0.0) {
            return Err(Error::InvalidConfig(format!("Rician factor {}", self.rician_eps)));
        }
        if !self.tx_snr_db.is_finite() {
            return Err(Error::InvalidConfig(format!("SNR {} dB", self.tx_snr_db)));
        }
        Ok(())
    }

    /// Draws the scenario from a generator seeded with `self.seed`.
    pub fn generate(&self) -> Result<Scenario> {
        gen_channels(self, &mut ChaCha8Rng::seed_from_u64(self.seed))
    }
}

/// Angles of arrival and departure, each in `[-pi/2, pi/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSet {
    /// Arrival at the IRS from the BS.
    pub nu: f64,
    /// Departure from the BS.
    pub phi_bs: f64,
    /// Departure from the IRS towards each user.
    pub zeta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub channels: ChannelSet,
    pub angles: AngleSet,
    /// IRS-to-user distances in metres.
    pub user_distances: Vec<f64>,
}

pub fn path_loss_db(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidConfig(format!("distance {d} must be positive")));
    }
    Ok(35.6 + 22.0 * d.log10())
}

/// Linear amplitude factor `10^(-dB/20)`.
pub fn path_loss_amplitude(d: f64) -> Result<f64> {
    Ok(10f64.powf(-path_loss_db(d)? / 20.0))
}

/// Half-wavelength ULA response, element `m` is `e^{j pi m sin(angle)}`.
pub fn steering(n: usize, angle: f64) -> Vec<C> {
    let s = angle.sin();
    (0..n).map(|m| C::cis(PI * m as f64 * s)).collect()
}

/// `(sqrt(eps/(eps+1)), sqrt(1/(eps+1)))`.
pub fn rician_weights(eps: f64) -> (f64, f64) {
    if eps.is_infinite() {
        (1.0, 0.0)
    } else {
        ((eps / (eps + 1.0)).sqrt(), (1.0 / (eps + 1.0)).sqrt())
    }
}

/// One CN(0, 1) sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Mixes a line-of-sight response with fresh CN(0, 1) scattering.
pub fn rician_mix<R: Rng + ?Sized>(los: &[C], eps: f64, rng: &mut R) -> Vec<C> {
    let (a, b) = rician_weights(eps);
    los.iter()
        .map(|l| {
            let nlos = complex_normal(rng);
            l * a + nlos * b
        })
        .collect()
}

/// Draws one scenario: angles, user positions, and both channels.
pub fn gen_channels<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let SystemDims { m, k, n } = config.dims;
    let angle = |rng: &mut R| rng.random::<f64>() * PI - FRAC_PI_2;

    let nu = angle(rng);
    let phi_bs = angle(rng);
    let zeta: Vec<f64> = (0..k).map(|_| angle(rng)).collect();

    // IRS at the origin, users uniform over a disk centred on the x axis.
    let user_distances: Vec<f64> = (0..k)
        .map(|_| {
            let r = config.user_ring_radius * rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * TAU;
            let (x, y) = (config.user_ring_distance + r * a.cos(), r * a.sin());
            x.hypot(y)
        })
        .collect();

    let l1 = path_loss_amplitude(config.d_bs_irs)?;
    let a_irs = steering(n, nu);
    let a_bs = steering(m, phi_bs);
    let mut los_g = Vec::with_capacity(n * m);
    for e in &a_irs {
        los_g.extend(a_bs.iter().map(|b| e * b.conj()));
    }
    let g: Vec<C> = rician_mix(&los_g, config.rician_eps, rng)
        .into_iter()
        .map(|z| z * l1)
        .collect();

    let mut hr = Vec::with_capacity(k * n);
    for user in 0..k {
        let l2 = path_loss_amplitude(user_distances[user])?;
        let los = steering(n, zeta[user]);
        hr.extend(rician_mix(&los, config.rician_eps, rng).into_iter().map(|z| z * l2));
    }

    let pmax = 1.0;
    let mut sigma2 = pmax / 10f64.powf(config.tx_snr_db / 10.0);
    if config.pathloss_mode == PathlossMode::Normalized {
        let reference = l1 * path_loss_amplitude(config.user_ring_distance)?;
        sigma2 *= reference * reference;
    }

    let channels = ChannelSet::new(
        Tensor::complex(vec![n, m], g)?,
        Tensor::complex(vec![k, n], hr)?,
        sigma2,
        pmax,
    )?;
    Ok(Scenario {
        channels,
        angles: AngleSet { nu, phi_bs, zeta },
        user_distances,
    })
}

/// Self-describing JSON form of a [`ChannelSet`]. Complex entries are
/// `[re, im]` pairs, matrices are lists of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dims: SystemDims,
    pub seed: u64,
    pub sigma2: f64,
    pub pmax: f64,
    pub g: Vec<Vec<[f64; 2]>>,
    pub hr: Vec<Vec<[f64; 2]>>,
}

impl ScenarioFile {
    pub fn new(channels: &ChannelSet, seed: u64) -> Self {
        let rows = |t: &Tensor| -> Vec<Vec<[f64; 2]>> {
            let cols = t.shape()[1];
            t.data()
                .chunks(cols.max(1))
                .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                .collect()
        };
        Self {
            dims: channels.dims(),
            seed,
            sigma2: channels.sigma2,
            pmax: channels.pmax,
            g: rows(&channels.g),
            hr: rows(&channels.hr),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn channels(&self) -> Result<ChannelSet> {
        let SystemDims { m, k, n } = self.dims;
        let flat = |rows: &[Vec<[f64; 2]>], r: usize, c: usize, what: &str| -> Result<Tensor> {
            if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                return Err(Error::InvalidConfig(format!("{what} is not {r}x{c}")));
            }
            Tensor::complex(
                vec![r, c],
                rows.iter().flatten().map(|[re, im]| C::new(*re, *im)).collect(),
            )
        };
        ChannelSet::new(
            flat(&self.g, n, m, "g")?,
            flat(&self.hr, k, n, "hr")?,
            self.sigma2,
            self.pmax,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1.0).unwrap() - 35.6).abs() < 1e-12);
        assert!((path_loss_db(10.0).unwrap() - 57.6).abs() < 1e-12);
        // 35.6 + 22 * 2.30103 = 86.2227
        assert!((path_loss_db(200.0).unwrap() - 86.22266).abs() < 1e-5);
        assert!(path_loss_db(0.0).is_err());
        assert!(path_loss_db(-3.0).is_err());
        assert!((path_loss_amplitude(1.0).unwrap() - 10f64.powf(-1.78)).abs() < 1e-15);
    }

    #[test]
    fn steering_examples() {
        assert!(steering(5, 0.0).iter().all(|z| *z == C::new(1.0, 0.0)));
        let s = steering(2, FRAC_PI_2);
        assert!((s[0] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s[1] - C::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(steering(16, 0.77).iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn same_seed_same_channels() {
        let cfg = ScenarioConfig::new(SystemDims::new(4, 2, 16).unwrap(), 42);
        let a = cfg.generate().unwrap();
        let b = cfg.generate().unwrap();
        assert_eq!(a.channels, b.channels);
        let mut other = cfg.clone();
        other.seed = 43;
        assert_ne!(other.generate().unwrap().channels, a.channels);
    }

    #[test]
    fn users_lie_in_the_ring() {
        let cfg = ScenarioConfig::new(SystemDims::new(2, 64, 4).unwrap(), 7);
        let s = cfg.generate().unwrap();
        assert!(s.user_distances.iter().all(|&d| (20.0..=40.0).contains(&d)));
        let all_angles = s.angles.zeta.iter().chain([&s.angles.nu, &s.angles.phi_bs]);
        assert!(all_angles.into_iter().all(|a| (-FRAC_PI_2..FRAC_PI_2).contains(a)));
    }

    #[test]
    fn infinite_rician_factor_is_pure_line_of_sight() {
        let mut cfg = ScenarioConfig::new(SystemDims::new(3, 2, 5).unwrap(), 3);
        cfg.rician_eps = f64::INFINITY;
        cfg.pathloss_mode = PathlossMode::Absolute;
        let s = cfg.generate().unwrap();
        let l1 = path_loss_amplitude(200.0).unwrap();
        let a_irs = steering(5, s.angles.nu);
        let a_bs = steering(3, s.angles.phi_bs);
        for (e, ai) in a_irs.iter().enumerate() {
            for (a, ab) in a_bs.iter().enumerate() {
                let want = ai * ab.conj() * l1;
                assert!((s.channels.g.at2(e, a) - want).norm() < 1e-18);
            }
        }
    }

    #[test]
    fn snr_modes() {
        let mut cfg = ScenarioConfig::new(SystemDims::new(2, 1, 4).unwrap(), 1);
        cfg.pathloss_mode = PathlossMode::Absolute;
        let abs = cfg.generate().unwrap().channels;
        assert!((abs.snr_db() - 20.0).abs() < 1e-9);
        cfg.pathloss_mode = PathlossMode::Normalized;
        let norm = cfg.generate().unwrap().channels;
        let pl = path_loss_db(200.0).unwrap() + path_loss_db(30.0).unwrap();
        assert!((norm.snr_db() - (20.0 + pl)).abs() < 1e-9);
        assert_eq!(abs.g, norm.g);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = ScenarioConfig::new(SystemDims::new(2, 1, 4).unwrap(), 1);
        cfg.rician_eps = -1.0;
        assert!(cfg.generate().is_err());
        let mut cfg = ScenarioConfig::new(SystemDims::new(2, 1, 4).unwrap(), 1);
        cfg.d_bs_irs = 0.0;
        assert!(cfg.generate().is_err());
    }

    #[test]
    fn json_replays_exactly() {
        let cfg = ScenarioConfig::new(SystemDims::new(3, 2, 6).unwrap(), 11);
        let ch = cfg.generate().unwrap().channels;
        let text = ScenarioFile::new(&ch, 11).to_json();
        let file = ScenarioFile::from_json(&text).unwrap();
        assert_eq!(file.seed, 11);
        assert_eq!(file.channels().unwrap(), ch);
        assert_eq!(file.to_json(), text);
    }

    #[test]
    fn json_rejects_unknown_keys_and_bad_shapes() {
        let ch = ScenarioConfig::new(SystemDims::new(1, 1, 2).unwrap(), 0)
            .generate()
            .unwrap()
            .channels;
        let mut value: serde_json::Value = serde_json::from_str(&ScenarioFile::new(&ch, 0).to_json()).unwrap();
        value["extra"] = serde_json::json!(1);
        assert!(ScenarioFile::from_json(&value.to_string()).is_err());
        let mut file = ScenarioFile::new(&ch, 0);
        file.g.pop();
        assert!(file.channels().is_err());
    }
}
