//! The self-play loop: every player runs CFR over its own deviation DAG,
//! plays the fixed point of its recommended deviation, and feeds back the
//! rank-one deviation utility built from the realized gradient.
//!
//! Soundness is asserted online: each iteration's fixed point must meet
//! the configured tolerance both as a fixed point and as a sequence-form
//! strategy, otherwise the run aborts with a numerical error. Gap
//! evaluation runs at the logging cadence on the running profile
//! aggregate.

use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::evaluation::{external_gap, linear_swap_gap, ProfileAccumulator};
use crate::game_core::GameModel;
use crate::utc::UtcDag;

use super::cfr::{CfrState, DeviationGradient};
use super::fixed_point::{fixed_point_from, FixedPointError};
use super::regret::RmKind;

/// Algorithm identifiers accepted by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    UtcCfrRmPlus,
    UtcCfrRm,
}

impl Algo {
    pub fn rm_kind(self) -> RmKind {
        match self {
            Algo::UtcCfrRmPlus => RmKind::RmPlus,
            Algo::UtcCfrRm => RmKind::Rm,
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "utc-cfr-rm+" => Ok(Algo::UtcCfrRmPlus),
            "utc-cfr-rm" => Ok(Algo::UtcCfrRm),
            other => Err(format!(
                "unknown algorithm {other:?} (expected utc-cfr-rm+ or utc-cfr-rm)"
            )),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algo::UtcCfrRmPlus => write!(f, "utc-cfr-rm+"),
            Algo::UtcCfrRm => write!(f, "utc-cfr-rm"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynConfig {
    pub iters: u64,
    pub algo: Algo,
    pub seed: u64,
    pub eps_fp: f64,
    pub normalize_utils: bool,
    pub log_every: u64,
    pub time_limit: Option<Duration>,
    /// Collect every iteration's wall time (used by the bench harness).
    pub collect_iter_times: bool,
}

impl Default for DynConfig {
    fn default() -> Self {
        DynConfig {
            iters: 1000,
            algo: Algo::UtcCfrRmPlus,
            seed: 0,
            eps_fp: 1e-9,
            normalize_utils: false,
            log_every: 50,
            time_limit: None,
            collect_iter_times: false,
        }
    }
}

/// One logged snapshot of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: u64,
    pub wall_ms: f64,
    pub iter_ms_mean: f64,
    pub iter_ms_std: f64,
    pub gap_per_player: Vec<f64>,
    pub gap_max: f64,
    pub gap_sum: f64,
    pub ext_gap_per_player: Vec<f64>,
    pub ext_gap_max: f64,
    /// Max fixed-point residual over the iterations since the last row.
    pub fp_residual_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminated {
    IterLimit,
    TimeLimit,
}

impl std::fmt::Display for Terminated {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Terminated::IterLimit => write!(f, "iters"),
            Terminated::TimeLimit => write!(f, "time"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub game: String,
    pub algo: Algo,
    pub seed: u64,
    pub normalized: bool,
    pub terminal_states: usize,
    pub d_per_player: Vec<usize>,
    pub dag_nodes_per_player: Vec<usize>,
    pub iterations: u64,
    pub terminated: Terminated,
    pub total_time_s: f64,
    pub final_gap_per_player: Vec<f64>,
    pub final_gap_max: f64,
    pub final_gap_sum: f64,
    pub max_fp_residual: f64,
    pub max_seq_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<LogRow>,
    pub summary: RunSummary,
    pub iter_times_ms: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum DynError {
    #[error("iteration {iter}, player {player}: {source}")]
    FixedPoint {
        iter: u64,
        player: usize,
        source: FixedPointError,
    },
    #[error("iteration {iter}, player {player}: fixed point missed tolerance ({residual} > {eps})")]
    Tolerance {
        iter: u64,
        player: usize,
        residual: f64,
        eps: f64,
    },
    #[error("iteration {iter}: {source}")]
    Gradient {
        iter: u64,
        source: crate::game_core::ModelError,
    },
}

/// Worker-pool size: one worker per player, capped by `UTC_EQ_THREADS`.
fn thread_cap(players: usize) -> usize {
    std::env::var("UTC_EQ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(players)
        .min(players)
}

pub fn run_dynamics(model: &GameModel, cfg: &DynConfig) -> Result<RunOutcome, DynError> {
    let normalized_model;
    let model = if cfg.normalize_utils {
        normalized_model = GameModel::new(model.game.normalized()).expect("normalization is safe");
        &normalized_model
    } else {
        model
    };
    let n = model.num_players();
    let dags: Vec<Arc<UtcDag>> = model
        .tfdps
        .iter()
        .map(|t| Arc::new(UtcDag::self_pair(t)))
        .collect();
    let mut states: Vec<CfrState> = dags
        .iter()
        .map(|dag| CfrState::new(dag.clone(), cfg.algo.rm_kind()))
        .collect();
    let dims: Vec<usize> = model.tfdps.iter().map(|t| t.d).collect();
    let mut acc = ProfileAccumulator::new(&dims);

    let cap = thread_cap(n);
    let start = Instant::now();
    let mut rows: Vec<LogRow> = Vec::new();
    let mut iter_times: Vec<f64> = Vec::new();
    let mut window_times: Vec<f64> = Vec::new();
    let mut window_fp_max = 0.0f64;
    let mut max_fp_residual = 0.0f64;
    let mut max_seq_residual = 0.0f64;
    let mut completed = 0u64;
    let mut terminated = Terminated::IterLimit;
    // Previous fixed points warm-start the next iteration's solves.
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; n];

    for t in 1..=cfg.iters {
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() >= limit {
                terminated = Terminated::TimeLimit;
                break;
            }
        }
        let iter_start = Instant::now();

        // Recommend and solve fixed points, players in parallel.
        let warm_ref = &warm;
        let recs = par_map_states(&mut states, cap, |i, st| {
            let dev = st.recommend();
            let fp = fixed_point_from(&dev, st.dag(), cfg.eps_fp, warm_ref[i].as_deref());
            (i, fp)
        });
        let mut xs: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (i, fp) in recs {
            let fp = fp.map_err(|source| DynError::FixedPoint {
                iter: t,
                player: i,
                source,
            })?;
            let worst = fp.residual.max(fp.seq_residual);
            if worst > cfg.eps_fp {
                return Err(DynError::Tolerance {
                    iter: t,
                    player: i,
                    residual: worst,
                    eps: cfg.eps_fp,
                });
            }
            window_fp_max = window_fp_max.max(fp.residual);
            max_fp_residual = max_fp_residual.max(fp.residual);
            max_seq_residual = max_seq_residual.max(fp.seq_residual);
            xs[i] = fp.x;
        }
        for (w, x) in warm.iter_mut().zip(&xs) {
            *w = Some(x.clone());
        }

        // Gradients need every player's strategy.
        let mut gs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            gs.push(
                model
                    .utility_gradient(i, &xs)
                    .map_err(|source| DynError::Gradient { iter: t, source })?,
            );
        }

        acc.accumulate(&xs, &gs);

        // Feed the rank-one deviation utilities back, players in parallel.
        let feedback = par_map_states(&mut states, cap, |i, st| {
            let grad = DeviationGradient::outer(st.dag(), &gs[i], &xs[i]);
            st.observe(&grad).expect("finite rank-one gradient");
            i
        });
        drop(feedback);

        completed = t;
        let dt_ms = iter_start.elapsed().as_secs_f64() * 1e3;
        window_times.push(dt_ms);
        if cfg.collect_iter_times {
            iter_times.push(dt_ms);
        }

        if t % cfg.log_every == 0 || t == cfg.iters {
            if rows.last().map(|r| r.t) != Some(t) {
                let lin = linear_swap_gap(&acc, &dags).expect("t >= 1");
                let ext = external_gap(&acc, &model.tfdps).expect("t >= 1");
                let (mean, std) = mean_std(&window_times);
                rows.push(LogRow {
                    t,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    iter_ms_mean: mean,
                    iter_ms_std: std,
                    gap_per_player: lin.per_player,
                    gap_max: lin.max,
                    gap_sum: lin.sum,
                    ext_gap_per_player: ext.per_player.clone(),
                    ext_gap_max: ext.max,
                    fp_residual_max: window_fp_max,
                });
                window_times.clear();
                window_fp_max = 0.0;
            }
        }
    }

    // Final row when the run stopped off-cadence (time limit).
    if completed > 0 && rows.last().map(|r| r.t) != Some(completed) {
        let lin = linear_swap_gap(&acc, &dags).expect("t >= 1");
        let ext = external_gap(&acc, &model.tfdps).expect("t >= 1");
        let (mean, std) = mean_std(&window_times);
        rows.push(LogRow {
            t: completed,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            iter_ms_mean: mean,
            iter_ms_std: std,
            gap_per_player: lin.per_player,
            gap_max: lin.max,
            gap_sum: lin.sum,
            ext_gap_per_player: ext.per_player.clone(),
            ext_gap_max: ext.max,
            fp_residual_max: window_fp_max,
        });
    }

    let last = rows.last();
    let summary = RunSummary {
        game: String::new(),
        algo: cfg.algo,
        seed: cfg.seed,
        normalized: cfg.normalize_utils,
        terminal_states: model.game.terminal_count(),
        d_per_player: dims,
        dag_nodes_per_player: dags.iter().map(|d| d.nodes.len()).collect(),
        iterations: completed,
        terminated,
        total_time_s: start.elapsed().as_secs_f64(),
        final_gap_per_player: last.map(|r| r.gap_per_player.clone()).unwrap_or_default(),
        final_gap_max: last.map(|r| r.gap_max).unwrap_or(f64::NAN),
        final_gap_sum: last.map(|r| r.gap_sum).unwrap_or(f64::NAN),
        max_fp_residual,
        max_seq_residual,
    };
    Ok(RunOutcome {
        rows,
        summary,
        iter_times_ms: iter_times,
    })
}

/// Runs `f` once per state, in batches of at most `cap` worker threads,
/// gathering results in player order (deterministic regardless of cap).
fn par_map_states<R: Send>(
    states: &mut [CfrState],
    cap: usize,
    f: impl Fn(usize, &mut CfrState) -> R + Sync,
) -> Vec<R> {
    let mut out: Vec<R> = Vec::with_capacity(states.len());
    if cap <= 1 {
        for (i, st) in states.iter_mut().enumerate() {
            out.push(f(i, st));
        }
        return out;
    }
    let mut base = 0usize;
    for chunk in states.chunks_mut(cap) {
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter_mut()
                .enumerate()
                .map(|(k, st)| {
                    let f = &f;
                    let i = base + k;
                    scope.spawn(move || f(i, st))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Vec<R>>()
        });
        out.extend(results);
        base += chunk.len();
    }
    out
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}
