//! Batch experiment harness: run a learning configuration, stream a CSV
//! log and a JSON summary to disk, and benchmark iteration times.
//!
//! CSV schema (one row per logged iteration):
//!
//! ```text
//! t,wall_ms,iter_ms_mean,iter_ms_std,gap_max,gap_sum,gap_p1,…,gap_pn,ext_gap_max,fp_residual_max
//! ```
//!
//! With `--no-timing` the three wall-clock columns are omitted, making the
//! file byte-reproducible for a fixed config and seed.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 resource limit hit before the first iteration completed.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::game_core::GameModel;
use crate::games::GameSpec;
use crate::learning::{run_dynamics, Algo, DynConfig, DynError, LogRow, RunOutcome};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub game: String,
    pub algo: String,
    pub iters: u64,
    pub time_limit: Option<f64>,
    pub seed: u64,
    pub eps_fp: f64,
    pub log_every: u64,
    pub out: Option<PathBuf>,
    pub no_timing: bool,
    pub normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            game: String::new(),
            algo: "utc-cfr-rm+".into(),
            iters: 1000,
            time_limit: None,
            seed: 0,
            eps_fp: 1e-9,
            log_every: 50,
            out: None,
            no_timing: false,
            normalize: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::ResourceLimit(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<(GameSpec, Algo, DynConfig), CliError> {
    if cfg.iters < 1 {
        return Err(CliError::Config("iterations must be at least 1".into()));
    }
    if cfg.log_every < 1 {
        return Err(CliError::Config("log cadence must be at least 1".into()));
    }
    if cfg.eps_fp <= 0.0 {
        return Err(CliError::Config("eps-fp must be positive".into()));
    }
    if let Some(t) = cfg.time_limit {
        if t < 0.0 {
            return Err(CliError::Config("time limit must be nonnegative".into()));
        }
    }
    let spec = GameSpec::parse(&cfg.game).map_err(|e| CliError::Config(e.to_string()))?;
    let algo: Algo = cfg
        .algo
        .parse()
        .map_err(|e: String| CliError::Config(e))?;
    let dyn_cfg = DynConfig {
        iters: cfg.iters,
        algo,
        seed: cfg.seed,
        eps_fp: cfg.eps_fp,
        normalize_utils: cfg.normalize,
        log_every: cfg.log_every,
        time_limit: cfg.time_limit.map(Duration::from_secs_f64),
        collect_iter_times: false,
    };
    Ok((spec, algo, dyn_cfg))
}

fn build_and_run(
    spec: &GameSpec,
    dyn_cfg: &DynConfig,
) -> Result<(GameModel, RunOutcome), CliError> {
    let game = spec.build().map_err(|e| CliError::Config(e.to_string()))?;
    let model = GameModel::new(game).map_err(|e| CliError::Config(e.to_string()))?;
    let mut outcome = run_dynamics(&model, dyn_cfg).map_err(|e| match e {
        DynError::FixedPoint { .. } | DynError::Tolerance { .. } => {
            CliError::Numerical(e.to_string())
        }
        DynError::Gradient { .. } => CliError::Numerical(e.to_string()),
    })?;
    if outcome.summary.iterations == 0 {
        return Err(CliError::ResourceLimit(
            "time limit reached before any iteration completed".into(),
        ));
    }
    outcome.summary.game = spec.to_string();
    Ok((model, outcome))
}

#[derive(Debug, Serialize)]
pub struct SummaryDoc {
    pub game: String,
    pub algo: String,
    pub seed: u64,
    pub normalize: bool,
    pub terminal_states: usize,
    pub d_per_player: Vec<usize>,
    pub dag_nodes_per_player: Vec<usize>,
    pub iterations: u64,
    pub terminated: String,
    pub total_time_s: f64,
    pub final_gap_max: f64,
    pub final_gap_sum: f64,
    pub final_gap_per_player: Vec<f64>,
    pub max_fp_residual: f64,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub summary: SummaryDoc,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Executes a run config, writing `<out>.csv` and `<out>.json` when an
/// output stem is configured.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts, CliError> {
    let (spec, algo, dyn_cfg) = validate(cfg)?;
    let (model, outcome) = build_and_run(&spec, &dyn_cfg)?;
    let n = model.num_players();
    let summary = SummaryDoc {
        game: spec.to_string(),
        algo: algo.to_string(),
        seed: cfg.seed,
        normalize: cfg.normalize,
        terminal_states: outcome.summary.terminal_states,
        d_per_player: outcome.summary.d_per_player.clone(),
        dag_nodes_per_player: outcome.summary.dag_nodes_per_player.clone(),
        iterations: outcome.summary.iterations,
        terminated: outcome.summary.terminated.to_string(),
        total_time_s: if cfg.no_timing {
            0.0
        } else {
            outcome.summary.total_time_s
        },
        final_gap_max: outcome.summary.final_gap_max,
        final_gap_sum: outcome.summary.final_gap_sum,
        final_gap_per_player: outcome.summary.final_gap_per_player.clone(),
        max_fp_residual: outcome.summary.max_fp_residual,
    };
    let (mut csv_path, mut json_path) = (None, None);
    if let Some(stem) = &cfg.out {
        let csv = stem.with_extension("csv");
        let json = stem.with_extension("json");
        let mut f = std::fs::File::create(&csv)?;
        write_csv(&mut f, &outcome.rows, n, cfg.no_timing)?;
        std::fs::write(&json, serde_json::to_string_pretty(&summary).unwrap())?;
        csv_path = Some(csv);
        json_path = Some(json);
    }
    Ok(RunArtifacts {
        summary,
        csv_path,
        json_path,
    })
}

pub fn csv_header(n_players: usize, no_timing: bool) -> String {
    let mut cols: Vec<String> = vec!["t".into()];
    if !no_timing {
        cols.extend(["wall_ms".into(), "iter_ms_mean".into(), "iter_ms_std".into()]);
    }
    cols.extend(["gap_max".into(), "gap_sum".into()]);
    for p in 1..=n_players {
        cols.push(format!("gap_p{p}"));
    }
    cols.extend(["ext_gap_max".into(), "fp_residual_max".into()]);
    cols.join(",")
}

pub fn write_csv(
    w: &mut impl Write,
    rows: &[LogRow],
    n_players: usize,
    no_timing: bool,
) -> std::io::Result<()> {
    writeln!(w, "{}", csv_header(n_players, no_timing))?;
    for r in rows {
        let mut cols: Vec<String> = vec![r.t.to_string()];
        if !no_timing {
            cols.push(format!("{:.3}", r.wall_ms));
            cols.push(format!("{:.6}", r.iter_ms_mean));
            cols.push(format!("{:.6}", r.iter_ms_std));
        }
        cols.push(r.gap_max.to_string());
        cols.push(r.gap_sum.to_string());
        for g in &r.gap_per_player {
            cols.push(g.to_string());
        }
        cols.push(r.ext_gap_max.to_string());
        cols.push(r.fp_residual_max.to_string());
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct BenchEntry {
    pub game: String,
    pub algo: String,
    pub iterations: u64,
    pub warmup_excluded: usize,
    pub iter_ms_mean: f64,
    pub iter_ms_std: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    /// Plain-text table, one line per config.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:<14} {:>8} {:>14} {:>14}\n",
            "game", "algo", "iters", "iter_ms_mean", "iter_ms_std"
        ));
        for e in &self.entries {
            out.push_str(&format!(
                "{:<28} {:<14} {:>8} {:>14.4} {:>14.4}\n",
                e.game, e.algo, e.iterations, e.iter_ms_mean, e.iter_ms_std
            ));
        }
        out
    }
}

/// Benchmarks each config sequentially (to avoid timing interference)
/// and reports mean and standard deviation of per-iteration wall time
/// over a warm-up-excluded window.
pub fn bench(cfgs: &[RunConfig]) -> Result<BenchReport, CliError> {
    if cfgs.is_empty() {
        return Err(CliError::Config("bench needs at least one config".into()));
    }
    let mut entries = Vec::new();
    for cfg in cfgs {
        let (spec, algo, mut dyn_cfg) = validate(cfg)?;
        dyn_cfg.collect_iter_times = true;
        // Gap evaluation would dominate micro-benchmarks.
        dyn_cfg.log_every = dyn_cfg.iters;
        let (_, outcome) = build_and_run(&spec, &dyn_cfg)?;
        let times = &outcome.iter_times_ms;
        let warmup = (times.len() / 10).max(1).min(times.len().saturating_sub(1));
        let window = &times[warmup..];
        let (mean, std) = mean_std(window);
        entries.push(BenchEntry {
            game: spec.to_string(),
            algo: algo.to_string(),
            iterations: outcome.summary.iterations,
            warmup_excluded: warmup,
            iter_ms_mean: mean,
            iter_ms_std: std,
        });
    }
    Ok(BenchReport { entries })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}
