//! Experiment runners. Every runner returns rows in a fixed order (grid
//! point, then scenario, then method) whatever order the parallel work
//! finishes in, so the CSV output depends only on the [`ExperimentSpec`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use netopt::beamforming::{solve, BeamformingProblem, ChannelSet, Solution, SolveConfig, SystemDims};
use netopt::channels::{ScenarioConfig, ScenarioFile};
use netopt::optim::{multi_restart, restart_rng, train, Problem, TrainTrace};

use crate::baseline::{baseline_random_mrt, baseline_rng};
use crate::config::{ExperimentKind, ExperimentSpec, OptimizerKind};
use crate::error::{CliError, Result};

/// Fixed learning rates traced by the convergence experiment.
pub const FIXED_LEARNING_RATES: [f64; 3] = [1.0, 0.1, 0.001];

pub const METHOD_SOLVE: &str = "solve";
pub const METHOD_BASELINE: &str = "random_mrt";

/// One (scenario, method, sweep point) result.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub scenario_seed: u64,
    pub dims: SystemDims,
    pub method: &'static str,
    pub restarts: usize,
    pub iterations: usize,
    /// Bits per channel use, recomputed from the feasible design.
    pub sum_rate: f64,
    /// Seconds spent building graphs and training; zero for the baseline.
    pub wall_time: f64,
}

/// Mean over scenarios of one (dims, method, restarts) group.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub dims: SystemDims,
    pub method: &'static str,
    pub restarts: usize,
    pub count: usize,
    pub mean_rate: f64,
    pub mean_iterations: f64,
    pub mean_wall_time: f64,
    pub std_wall_time: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub rows: Vec<ResultRow>,
}

impl RunReport {
    /// Groups in order of first appearance.
    pub fn summaries(&self) -> Vec<Summary> {
        let mut keys: Vec<(SystemDims, &'static str, usize)> = Vec::new();
        for r in &self.rows {
            let key = (r.dims, r.method, r.restarts);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(dims, method, restarts)| {
                let group: Vec<&ResultRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.dims == dims && r.method == method && r.restarts == restarts)
                    .collect();
                let n = group.len() as f64;
                let mean = |f: &dyn Fn(&ResultRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
                let mean_wall = mean(&|r| r.wall_time);
                let var_wall = if group.len() > 1 {
                    group.iter().map(|r| (r.wall_time - mean_wall).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                Summary {
                    dims,
                    method,
                    restarts,
                    count: group.len(),
                    mean_rate: mean(&|r| r.sum_rate),
                    mean_iterations: mean(&|r| r.iterations as f64),
                    mean_wall_time: mean_wall,
                    std_wall_time: var_wall.sqrt(),
                }
            })
            .collect()
    }

    pub fn summary(&self, dims: SystemDims, method: &str, restarts: usize) -> Option<Summary> {
        self.summaries()
            .into_iter()
            .find(|s| s.dims == dims && s.method == method && s.restarts == restarts)
    }

    /// Deterministic results: per-scenario rows, then one `mean` row per group.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "experiment",
            "scenario_seed",
            "m",
            "k",
            "n",
            "method",
            "restarts",
            "iterations",
            "sum_rate",
        ])?;
        let kind = self.kind.as_str();
        for r in &self.rows {
            w.write_record([
                r.experiment.to_string(),
                r.scenario_seed.to_string(),
                r.dims.m.to_string(),
                r.dims.k.to_string(),
                r.dims.n.to_string(),
                r.method.to_string(),
                r.restarts.to_string(),
                r.iterations.to_string(),
                r.sum_rate.to_string(),
            ])?;
        }
        for s in self.summaries() {
            w.write_record([
                kind.to_string(),
                "mean".into(),
                s.dims.m.to_string(),
                s.dims.k.to_string(),
                s.dims.n.to_string(),
                s.method.to_string(),
                s.restarts.to_string(),
                s.mean_iterations.to_string(),
                s.mean_rate.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Wall times, which differ between runs, kept out of the main CSV.
    pub fn write_wall_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "experiment",
            "scenario_seed",
            "m",
            "k",
            "n",
            "method",
            "restarts",
            "iterations",
            "wall_time_s",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.experiment.to_string(),
                r.scenario_seed.to_string(),
                r.dims.m.to_string(),
                r.dims.k.to_string(),
                r.dims.n.to_string(),
                r.method.to_string(),
                r.restarts.to_string(),
                r.iterations.to_string(),
                r.wall_time.to_string(),
            ])?;
        }
        for s in self.summaries() {
            for (label, value) in [("mean", s.mean_wall_time), ("std", s.std_wall_time)] {
                w.write_record([
                    self.kind.as_str().to_string(),
                    label.into(),
                    s.dims.m.to_string(),
                    s.dims.k.to_string(),
                    s.dims.n.to_string(),
                    s.method.to_string(),
                    s.restarts.to_string(),
                    s.mean_iterations.to_string(),
                    value.to_string(),
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// One optimizer setting of the convergence experiment.
#[derive(Clone, Debug)]
pub struct ConvergenceRun {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub trace: TrainTrace,
    /// Rate of the returned (best) design, recomputed.
    pub sum_rate: f64,
    pub wall_time: f64,
}

impl ConvergenceRun {
    pub fn label(&self) -> &'static str {
        match self.optimizer {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "fixed",
        }
    }

    /// Rate after each step.
    pub fn rates(&self) -> Vec<f64> {
        self.trace.losses.iter().map(|l| -l).collect()
    }

    /// Sample variance of the step-to-step rate changes, starting from the
    /// initial point.
    pub fn rate_step_variance(&self) -> f64 {
        let mut rates = vec![-self.trace.initial_loss];
        rates.extend(self.rates());
        let diffs: Vec<f64> = rates.windows(2).map(|w| w[1] - w[0]).collect();
        if diffs.len() < 2 {
            return 0.0;
        }
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    /// First iteration whose rate reaches `fraction` of the final rate.
    pub fn iterations_to_reach(&self, fraction: f64) -> Option<usize> {
        let target = fraction * self.sum_rate;
        if -self.trace.initial_loss >= target {
            return Some(0);
        }
        self.rates().iter().position(|&r| r >= target).map(|i| i + 1)
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub dims: SystemDims,
    pub scenario_seed: u64,
    /// Fixed learning rates in [`FIXED_LEARNING_RATES`] order, then Adam.
    pub runs: Vec<ConvergenceRun>,
}

impl ConvergenceReport {
    pub fn fixed(&self, lr: f64) -> Option<&ConvergenceRun> {
        self.runs
            .iter()
            .find(|r| r.optimizer == OptimizerKind::Sgd && r.lr == lr)
    }

    pub fn adam(&self) -> &ConvergenceRun {
        self.runs
            .iter()
            .find(|r| r.optimizer == OptimizerKind::Adam)
            .expect("convergence report always holds an Adam run")
    }

    /// Per-iteration trace rows followed by one summary row per setting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "optimizer", "lr", "iter", "loss", "sum_rate"])?;
        for run in &self.runs {
            for (i, loss) in run.trace.losses.iter().enumerate() {
                w.write_record([
                    "trace".to_string(),
                    run.label().into(),
                    run.lr.to_string(),
                    (i + 1).to_string(),
                    loss.to_string(),
                    (-loss).to_string(),
                ])?;
            }
        }
        for run in &self.runs {
            w.write_record([
                "summary".to_string(),
                run.label().into(),
                run.lr.to_string(),
                run.trace.iterations_run().to_string(),
                run.trace.best_loss().to_string(),
                run.sum_rate.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_wall_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["optimizer", "lr", "iterations", "wall_time_s"])?;
        for run in &self.runs {
            w.write_record([
                run.label().to_string(),
                run.lr.to_string(),
                run.trace.iterations_run().to_string(),
                run.wall_time.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Report {
    Convergence(ConvergenceReport),
    Runs(RunReport),
}

impl Report {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match self {
            Self::Convergence(r) => r.write_csv(&mut buf)?,
            Self::Runs(r) => r.write_csv(&mut buf)?,
        }
        Ok(buf)
    }

    pub fn wall_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match self {
            Self::Convergence(r) => r.write_wall_csv(&mut buf)?,
            Self::Runs(r) => r.write_wall_csv(&mut buf)?,
        }
        Ok(buf)
    }

    /// Writes the results to `out` and wall times next to it; returns both paths.
    pub fn write_files(&self, out: &Path) -> Result<(PathBuf, PathBuf)> {
        let wall = wall_path(out);
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        std::fs::write(out, self.csv_bytes()?).map_err(|e| io_err(out, e))?;
        std::fs::write(&wall, self.wall_csv_bytes()?).map_err(|e| io_err(&wall, e))?;
        Ok((out.to_path_buf(), wall))
    }
}

/// `results.csv` -> `results.wall.csv`.
pub fn wall_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.wall.csv"))
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn scenario_config(spec: &ExperimentSpec, dims: SystemDims, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(dims, seed);
    cfg.rician_eps = spec.scenario.rician_eps;
    cfg.tx_snr_db = spec.scenario.snr_db;
    cfg.pathloss_mode = spec.scenario.pathloss_mode;
    cfg
}

pub fn draw_channels(spec: &ExperimentSpec, dims: SystemDims, seed: u64) -> Result<ChannelSet> {
    Ok(scenario_config(spec, dims, seed).generate()?.channels)
}

fn load_replay(path: &Path) -> Result<(ChannelSet, u64)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file = ScenarioFile::from_json(&text)?;
    Ok((file.channels()?, file.seed))
}

fn checked(sol: Solution, channels: &ChannelSet, seed: u64, method: &'static str) -> Result<Solution> {
    if !sol.sum_rate.is_finite() || !sol.is_feasible(channels.pmax) {
        return Err(CliError::NonFiniteRate { seed, method });
    }
    Ok(sol)
}

fn solve_row(spec: &ExperimentSpec, channels: &ChannelSet, seed: u64, restarts: usize) -> Result<ResultRow> {
    let config = SolveConfig {
        train: spec.train_config(),
        restarts,
        seed,
        warm_start: None,
    };
    let start = Instant::now();
    let sol = solve(channels, &config)?;
    let wall_time = start.elapsed().as_secs_f64();
    let sol = checked(sol, channels, seed, METHOD_SOLVE)?;
    Ok(ResultRow {
        experiment: spec.kind.as_str(),
        scenario_seed: seed,
        dims: channels.dims(),
        method: METHOD_SOLVE,
        restarts,
        iterations: sol.total_iterations,
        sum_rate: sol.sum_rate,
        wall_time,
    })
}

fn baseline_row(spec: &ExperimentSpec, channels: &ChannelSet, seed: u64) -> Result<ResultRow> {
    let r = baseline_random_mrt(channels, spec.baseline_samples, &mut baseline_rng(seed))?;
    if !r.sum_rate.is_finite() {
        return Err(CliError::NonFiniteRate {
            seed,
            method: METHOD_BASELINE,
        });
    }
    Ok(ResultRow {
        experiment: spec.kind.as_str(),
        scenario_seed: seed,
        dims: channels.dims(),
        method: METHOD_BASELINE,
        restarts: spec.baseline_samples,
        iterations: 0,
        sum_rate: r.sum_rate,
        wall_time: 0.0,
    })
}

/// Every (grid point, scenario) pair in output order.
fn work_items(spec: &ExperimentSpec) -> Vec<(SystemDims, u64)> {
    spec.grid
        .iter()
        .flat_map(|&d| (0..spec.scenarios).map(move |j| (d, spec.scenario_seed(j))))
        .collect()
}

/// Traces fixed-rate gradient descent at each of [`FIXED_LEARNING_RATES`]
/// and Adam at `spec.lr`, all from the same starting point.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    let (channels, seed) = match &spec.replay {
        Some(path) => load_replay(path)?,
        None => (draw_channels(spec, spec.grid[0], spec.seed)?, spec.seed),
    };
    let problem = BeamformingProblem::new(channels.clone());
    let init = problem.random_init(&mut restart_rng(seed, 0));

    let mut settings: Vec<(OptimizerKind, f64)> = FIXED_LEARNING_RATES
        .iter()
        .map(|&lr| (OptimizerKind::Sgd, lr))
        .collect();
    settings.push((OptimizerKind::Adam, spec.lr));

    let runs = settings
        .into_par_iter()
        .map(|(optimizer, lr)| -> Result<ConvergenceRun> {
            let start = Instant::now();
            let result = train(&problem, init.clone(), &spec.train_config_with(optimizer, lr))?;
            let wall_time = start.elapsed().as_secs_f64();
            let sol = Solution::from_leaves(&channels, &result.params, result.trace.clone())?;
            let sol = checked(sol, &channels, seed, METHOD_SOLVE)?;
            Ok(ConvergenceRun {
                optimizer,
                lr,
                trace: result.trace,
                sum_rate: sol.sum_rate,
                wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        dims: channels.dims(),
        scenario_seed: seed,
        runs,
    })
}

/// Best-of-k for every k in `spec.restarts`. The runs of one scenario are
/// shared: best-of-k is the best of the first k of `max(k)` runs.
pub fn run_restart_sweep(spec: &ExperimentSpec) -> Result<RunReport> {
    let k_max = *spec.restarts.iter().max().expect("validated non-empty");
    let per_item = work_items(spec)
        .into_par_iter()
        .map(|(dims, seed)| -> Result<Vec<ResultRow>> {
            let channels = draw_channels(spec, dims, seed)?;
            let problem = BeamformingProblem::new(channels.clone());
            let start = Instant::now();
            let outcome = multi_restart(&problem, &spec.train_config(), k_max, seed, None)?;
            let per_run = start.elapsed().as_secs_f64() / k_max as f64;
            spec.restarts
                .iter()
                .map(|&k| {
                    let best = &outcome.runs[outcome.best_index_of_first(k)];
                    let sol = Solution::from_leaves(&channels, &best.params, best.trace.clone())?;
                    let sol = checked(sol, &channels, seed, METHOD_SOLVE)?;
                    Ok(ResultRow {
                        experiment: spec.kind.as_str(),
                        scenario_seed: seed,
                        dims,
                        method: METHOD_SOLVE,
                        restarts: k,
                        iterations: outcome.runs[..k].iter().map(|r| r.trace.iterations_run()).sum(),
                        sum_rate: sol.sum_rate,
                        wall_time: per_run * k as f64,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    // Rows grouped by k, scenarios in seed order within each group.
    let mut rows = Vec::new();
    for i in 0..spec.restarts.len() {
        rows.extend(per_item.iter().map(|r| r[i].clone()));
    }
    Ok(RunReport { kind: spec.kind, rows })
}

/// Solver against the random-phase MRT baseline at every grid point.
pub fn run_n_sweep(spec: &ExperimentSpec) -> Result<RunReport> {
    let restarts = spec.restarts[0];
    let per_item = work_items(spec)
        .into_par_iter()
        .map(|(dims, seed)| -> Result<[ResultRow; 2]> {
            let channels = draw_channels(spec, dims, seed)?;
            Ok([
                solve_row(spec, &channels, seed, restarts)?,
                baseline_row(spec, &channels, seed)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(per_item.len() * 2);
    for dims in &spec.grid {
        for method in 0..2 {
            rows.extend(
                per_item
                    .iter()
                    .filter(|r| r[0].dims == *dims)
                    .map(|r| r[method].clone()),
            );
        }
    }
    Ok(RunReport { kind: spec.kind, rows })
}

/// Solves sequentially so wall times are not inflated by contention.
/// Channel generation is outside the timed region.
pub fn run_timing(spec: &ExperimentSpec) -> Result<RunReport> {
    let restarts = spec.restarts[0];
    let rows = work_items(spec)
        .into_iter()
        .map(|(dims, seed)| {
            let channels = draw_channels(spec, dims, seed)?;
            solve_row(spec, &channels, seed, restarts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport { kind: spec.kind, rows })
}

/// One solve per scenario, or one solve of a replayed scenario.
pub fn run_single(spec: &ExperimentSpec) -> Result<RunReport> {
    let restarts = spec.restarts[0];
    if let Some(path) = &spec.replay {
        let (channels, seed) = load_replay(path)?;
        let row = solve_row(spec, &channels, seed, restarts)?;
        return Ok(RunReport {
            kind: spec.kind,
            rows: vec![row],
        });
    }
    if let Some(path) = &spec.export_scenario {
        let seed = spec.scenario_seed(0);
        let channels = draw_channels(spec, spec.grid[0], seed)?;
        std::fs::write(path, ScenarioFile::new(&channels, seed).to_json()).map_err(|e| io_err(path, e))?;
    }
    let rows = work_items(spec)
        .into_par_iter()
        .map(|(dims, seed)| solve_row(spec, &draw_channels(spec, dims, seed)?, seed, restarts))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport { kind: spec.kind, rows })
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    Ok(match spec.kind {
        ExperimentKind::Convergence => Report::Convergence(run_convergence(spec)?),
        ExperimentKind::RestartSweep => Report::Runs(run_restart_sweep(spec)?),
        ExperimentKind::NSweep => Report::Runs(run_n_sweep(spec)?),
        ExperimentKind::Timing => Report::Runs(run_timing(spec)?),
        ExperimentKind::Single => Report::Runs(run_single(spec)?),
    })
}
