//! Command-line flags, the JSON config file, and their merge into an
//! [`ExperimentSpec`].

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use netopt::beamforming::SystemDims;
use netopt::channels::PathlossMode;
use netopt::optim::{OptimizerConfig, TrainConfig, DEFAULT_MAX_ITERS, DEFAULT_PATIENCE};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Per-iteration traces for fixed learning rates and Adam.
    Convergence,
    /// Mean best-of-k rate against the number of restarts.
    RestartSweep,
    /// Mean rate against the number of reflecting elements.
    NSweep,
    /// Wall time per system size.
    Timing,
    /// One solve per scenario.
    Single,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::RestartSweep => "restart_sweep",
            Self::NSweep => "n_sweep",
            Self::Timing => "timing",
            Self::Single => "single",
        }
    }

    fn default_scenarios(self) -> usize {
        match self {
            Self::Convergence | Self::Single => 1,
            Self::RestartSweep => 20,
            Self::NSweep => 10,
            Self::Timing => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    /// Plain gradient descent with a fixed learning rate.
    Sgd,
}

/// Desk-scale N grid for the N sweep.
pub const N_SWEEP_GRID: [usize; 4] = [8, 16, 32, 64];
/// N grid of the full-size sweep.
pub const N_SWEEP_FULL_GRID: [usize; 9] = [16, 32, 48, 64, 80, 96, 112, 128, 144];
/// Default timing configurations as `(M, N, K)`.
pub const TIMING_GRID: [(usize, usize, usize); 4] = [(4, 64, 2), (8, 64, 2), (8, 128, 2), (8, 128, 4)];
pub const RESTART_GRID: [usize; 4] = [1, 2, 4, 8];
pub const DEFAULT_BASELINE_SAMPLES: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "netopt",
    version,
    about = "Joint IRS phase-shift and beamforming design by per-instance training",
    arg_required_else_help = true,
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub kind: Option<ExperimentKind>,
    /// Base-station antennas.
    #[arg(long)]
    pub m: Option<usize>,
    /// Users.
    #[arg(long)]
    pub k: Option<usize>,
    /// Reflecting elements; a comma-separated list sweeps N.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Transmit SNR Pmax/sigma^2 in dB.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub rician_eps: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Random initializations; a comma-separated list for the restart sweep.
    #[arg(long, value_delimiter = ',')]
    pub restarts: Option<Vec<usize>>,
    #[arg(long)]
    pub scenarios: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `normalized` or `absolute`.
    #[arg(long)]
    pub pathloss_mode: Option<PathlossMode>,
    /// Random phase draws for the random-phase MRT baseline.
    #[arg(long)]
    pub baseline_samples: Option<usize>,
    /// Use the full N grid (up to 144) for the N sweep.
    #[arg(long)]
    pub full_grid: bool,
    /// Output CSV path; defaults to `<kind>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Solve a scenario exported with `--export-scenario` instead of drawing one.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Write the first scenario of a `single` run as JSON.
    #[arg(long)]
    pub export_scenario: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<usize> {
        match self {
            Self::One(v) => vec![v],
            Self::Many(v) => v,
        }
    }
}

/// Contents of `--config`; every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    kind: Option<ExperimentKind>,
    m: Option<usize>,
    k: Option<usize>,
    n: Option<OneOrMany>,
    snr_db: Option<f64>,
    rician_eps: Option<f64>,
    lr: Option<f64>,
    optimizer: Option<OptimizerKind>,
    patience: Option<usize>,
    max_iters: Option<usize>,
    restarts: Option<OneOrMany>,
    scenarios: Option<usize>,
    seed: Option<u64>,
    pathloss_mode: Option<PathlossMode>,
    baseline_samples: Option<usize>,
    full_grid: Option<bool>,
    out: Option<PathBuf>,
    replay: Option<PathBuf>,
    export_scenario: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::usage("config", e.to_string()))?;
        let map = value
            .as_object()
            .ok_or_else(|| CliError::usage("config", "expected a JSON object"))?;
        // Deserialize key by key so the error names the offending key.
        for (key, v) in map {
            let single = serde_json::Value::Object([(key.clone(), v.clone())].into_iter().collect());
            serde_json::from_value::<FileConfig>(single).map_err(|e| CliError::usage(key, e.to_string()))?;
        }
        serde_json::from_value(value).map_err(|e| CliError::usage("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }
}

/// Scenario-generation settings shared by every experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    pub snr_db: f64,
    pub rician_eps: f64,
    pub pathloss_mode: PathlossMode,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            snr_db: 20.0,
            rician_eps: 10.0,
            pathloss_mode: PathlossMode::Normalized,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// System sizes to run, in output order.
    pub grid: Vec<SystemDims>,
    pub scenario: ScenarioParams,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub patience: usize,
    pub max_iters: usize,
    /// Restart counts; a single entry except for the restart sweep.
    pub restarts: Vec<usize>,
    pub scenarios: usize,
    pub seed: u64,
    pub baseline_samples: usize,
    pub out: PathBuf,
    pub replay: Option<PathBuf>,
    pub export_scenario: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Defaults for `kind` before any flag or file value is applied.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let dims = |m, k, n| SystemDims { m, k, n };
        let grid = match kind {
            ExperimentKind::Convergence => vec![dims(8, 4, 64)],
            ExperimentKind::RestartSweep | ExperimentKind::Single => vec![dims(4, 2, 16)],
            ExperimentKind::NSweep => N_SWEEP_GRID.iter().map(|&n| dims(8, 4, n)).collect(),
            ExperimentKind::Timing => TIMING_GRID.iter().map(|&(m, n, k)| dims(m, k, n)).collect(),
        };
        let restarts = match kind {
            ExperimentKind::RestartSweep => RESTART_GRID.to_vec(),
            _ => vec![1],
        };
        Self {
            kind,
            grid,
            scenario: ScenarioParams::default(),
            optimizer: OptimizerKind::Adam,
            lr: 0.1,
            patience: DEFAULT_PATIENCE,
            max_iters: DEFAULT_MAX_ITERS,
            restarts,
            scenarios: kind.default_scenarios(),
            seed: 0,
            baseline_samples: DEFAULT_BASELINE_SAMPLES,
            out: PathBuf::from(format!("{}.csv", kind.as_str())),
            replay: None,
            export_scenario: None,
        }
    }

    /// Merges flags over the config file over the per-kind defaults.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let kind = cli
            .kind
            .or(file.kind)
            .ok_or_else(|| CliError::usage("kind", "missing; pass --kind or set it in the config file"))?;
        let mut spec = Self::defaults(kind);

        let m = cli.m.or(file.m);
        let k = cli.k.or(file.k);
        let n = cli.n.or(file.n.map(OneOrMany::into_vec));
        let full_grid = cli.full_grid || file.full_grid.unwrap_or(false);
        if full_grid && kind == ExperimentKind::NSweep && n.is_none() {
            spec.grid = N_SWEEP_FULL_GRID
                .iter()
                .map(|&n| SystemDims { m: 8, k: 4, n })
                .collect();
        }
        if m.is_some() || k.is_some() || n.is_some() {
            let base = spec.grid[0];
            let (m, k) = (m.unwrap_or(base.m), k.unwrap_or(base.k));
            let ns = n.unwrap_or_else(|| {
                let mut ns: Vec<usize> = spec.grid.iter().map(|d| d.n).collect();
                ns.dedup();
                ns
            });
            check_positive("m", m)?;
            check_positive("k", k)?;
            if ns.is_empty() {
                return Err(CliError::usage("n", "empty list"));
            }
            for &v in &ns {
                check_positive("n", v)?;
            }
            spec.grid = ns.into_iter().map(|n| SystemDims { m, k, n }).collect();
        }

        let scenario = &mut spec.scenario;
        if let Some(v) = cli.snr_db.or(file.snr_db) {
            if !v.is_finite() {
                return Err(CliError::usage("snr-db", format!("{v} is not finite")));
            }
            scenario.snr_db = v;
        }
        if let Some(v) = cli.rician_eps.or(file.rician_eps) {
            if v.is_nan() || v < 0.0 {
                return Err(CliError::usage("rician-eps", format!("{v} must be non-negative")));
            }
            scenario.rician_eps = v;
        }
        if let Some(v) = cli.pathloss_mode.or(file.pathloss_mode) {
            scenario.pathloss_mode = v;
        }
        if let Some(v) = cli.lr.or(file.lr) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::usage("lr", format!("{v} must be positive")));
            }
            spec.lr = v;
        }
        if let Some(v) = cli.optimizer.or(file.optimizer) {
            spec.optimizer = v;
        }
        if let Some(v) = cli.patience.or(file.patience) {
            check_positive("patience", v)?;
            spec.patience = v;
        }
        if let Some(v) = cli.max_iters.or(file.max_iters) {
            check_positive("max-iters", v)?;
            spec.max_iters = v;
        }
        if let Some(v) = cli.restarts.or(file.restarts.map(OneOrMany::into_vec)) {
            if v.is_empty() {
                return Err(CliError::usage("restarts", "empty list"));
            }
            for &r in &v {
                check_positive("restarts", r)?;
            }
            if kind != ExperimentKind::RestartSweep && v.len() != 1 {
                return Err(CliError::usage(
                    "restarts",
                    format!("{} takes a single value", kind.as_str()),
                ));
            }
            spec.restarts = v;
        }
        if let Some(v) = cli.scenarios.or(file.scenarios) {
            check_positive("scenarios", v)?;
            spec.scenarios = v;
        }
        if let Some(v) = cli.seed.or(file.seed) {
            spec.seed = v;
        }
        if let Some(v) = cli.baseline_samples.or(file.baseline_samples) {
            check_positive("baseline-samples", v)?;
            spec.baseline_samples = v;
        }
        if let Some(v) = cli.out.or(file.out) {
            spec.out = v;
        }
        spec.replay = cli.replay.or(file.replay);
        spec.export_scenario = cli.export_scenario.or(file.export_scenario);

        if kind == ExperimentKind::Convergence && spec.grid.len() != 1 {
            return Err(CliError::usage("n", "convergence runs a single system size"));
        }
        if spec.replay.is_some() && !matches!(kind, ExperimentKind::Single | ExperimentKind::Convergence) {
            return Err(CliError::usage(
                "replay",
                "only single and convergence runs replay a scenario",
            ));
        }
        Ok(spec)
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train_config_with(self.optimizer, self.lr)
    }

    pub fn train_config_with(&self, optimizer: OptimizerKind, lr: f64) -> TrainConfig {
        let optimizer = match optimizer {
            OptimizerKind::Adam => OptimizerConfig::Adam { lr },
            OptimizerKind::Sgd => OptimizerConfig::Sgd { lr },
        };
        TrainConfig {
            optimizer,
            patience: self.patience,
            max_iters: self.max_iters,
        }
    }

    /// Seed of scenario `j`.
    pub fn scenario_seed(&self, j: usize) -> u64 {
        self.seed.wrapping_add(j as u64)
    }
}

fn check_positive(key: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(CliError::usage(key, "must be positive"));
    }
    Ok(())
}
