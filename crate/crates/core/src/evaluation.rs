//! Equilibrium-gap measurement.
//!
//! The empirical profile of play is summarized per player by the running
//! sum of rank-one deviation utilities `G = sum_t g^t (x^t)^T` and the
//! realized value `v = sum_t <g^t, x^t>`. By linearity, the average gain
//! of a fixed deviation `A` over `T` iterations is
//! `(<G, A> - v) / T`, so the linear-swap gap is a best response over the
//! deviation polytope — a reverse-topological dynamic program on the UTC
//! DAG. The external (constant-deviation) gap is the classical tree best
//! response on the summed gradient and lower-bounds the linear-swap gap.

use ndarray::Array2;
use thiserror::Error;

use crate::game_core::Tfdp;
use crate::learning::DeviationGradient;
use crate::utc::{behavioral_to_sequence, BehavioralUtcStrategy, NodeKind, UtcDag, UtcDeviation};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no iterations accumulated")]
    Empty,
}

/// Per-player running aggregation of the correlated profile.
#[derive(Debug, Clone)]
pub struct PlayerAcc {
    /// `sum_t g^t (x^t)^T`, the deviation-payoff matrix.
    pub g_outer: Array2<f64>,
    /// `sum_t g^t`, for the external best response.
    pub g_sum: Vec<f64>,
    /// `sum_t <g^t, x^t>`, the realized value.
    pub v_sum: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileAccumulator {
    pub players: Vec<PlayerAcc>,
    pub t: u64,
}

impl ProfileAccumulator {
    pub fn new(dims: &[usize]) -> Self {
        ProfileAccumulator {
            players: dims
                .iter()
                .map(|&d| PlayerAcc {
                    g_outer: Array2::zeros((d, d)),
                    g_sum: vec![0.0; d],
                    v_sum: 0.0,
                })
                .collect(),
            t: 0,
        }
    }

    /// Folds in one iteration: strategies `xs` and gradients `gs`, one per
    /// player.
    pub fn accumulate(&mut self, xs: &[Vec<f64>], gs: &[Vec<f64>]) {
        for (acc, (x, g)) in self.players.iter_mut().zip(xs.iter().zip(gs)) {
            for (s, &gv) in g.iter().enumerate() {
                if gv == 0.0 {
                    continue;
                }
                for (m, &xv) in x.iter().enumerate() {
                    acc.g_outer[[s, m]] += gv * xv;
                }
            }
            for (a, &gv) in acc.g_sum.iter_mut().zip(g) {
                *a += gv;
            }
            acc.v_sum += g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        self.t += 1;
    }
}

/// Maximizes `<G_A, A> + <G_B, B>` over the deviation polytope by dynamic
/// programming in reverse topological order, and returns the optimum with
/// a greedy argmax pure deviation (ties break to the lowest-index child).
pub fn best_response_value(dag: &UtcDag, grad: &DeviationGradient) -> (f64, UtcDeviation) {
    let n = dag.nodes.len();
    let mut val = vec![0.0f64; n];
    let mut choice = vec![0usize; dag.decisions.len()];
    for id in (0..n).rev() {
        let node = &dag.nodes[id];
        match node.kind {
            NodeKind::ObsGame { seq, mseq } => {
                let mut v = grad.g_a[[seq, mseq]];
                for e in &node.out {
                    v += val[e.to];
                }
                val[id] = v;
            }
            NodeKind::ObsRec { dp, mdp } => {
                let mut v = grad.g_b[[dp, mdp]];
                for e in &node.out {
                    v += val[e.to];
                }
                val[id] = v;
            }
            NodeKind::Dec { .. } => {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (k, e) in node.out.iter().enumerate() {
                    if val[e.to] > best {
                        best = val[e.to];
                        arg = k;
                    }
                }
                val[id] = best;
                choice[node.decision_index] = arg;
            }
        }
    }
    let plan = BehavioralUtcStrategy::pure(dag, |_, id| choice[dag.nodes[id].decision_index]);
    let dev = behavioral_to_sequence(&plan, dag).expect("pure plan is valid");
    (val[0], dev)
}

/// Per-player linear-swap gaps plus max and sum aggregations.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub per_player: Vec<f64>,
    pub max: f64,
    pub sum: f64,
}

/// `gap_i = (max_A <G_i, A> - v_i) / T`. Nonnegative up to rounding since
/// the identity deviation is always available.
pub fn linear_swap_gap(
    acc: &ProfileAccumulator,
    dags: &[std::sync::Arc<UtcDag>],
) -> Result<GapReport, EvalError> {
    if acc.t == 0 {
        return Err(EvalError::Empty);
    }
    let mut per_player = Vec::with_capacity(acc.players.len());
    for (p, dag) in acc.players.iter().zip(dags) {
        let grad = DeviationGradient {
            g_a: p.g_outer.clone(),
            g_b: Array2::zeros((dag.real.n_dps(), dag.med.n_dps())),
        };
        let (br, _) = best_response_value(dag, &grad);
        per_player.push((br - p.v_sum) / acc.t as f64);
    }
    Ok(report_from(per_player))
}

/// External (constant-deviation) gaps: tree best response on the summed
/// gradient. Always at most the linear-swap gap.
pub fn external_gap(acc: &ProfileAccumulator, tfdps: &[std::sync::Arc<Tfdp>]) -> Result<GapReport, EvalError> {
    if acc.t == 0 {
        return Err(EvalError::Empty);
    }
    let mut per_player = Vec::with_capacity(acc.players.len());
    for (p, tfdp) in acc.players.iter().zip(tfdps) {
        let (br, _) = tfdp.best_response(&p.g_sum);
        per_player.push((br - p.v_sum) / acc.t as f64);
    }
    Ok(report_from(per_player))
}

fn report_from(per_player: Vec<f64>) -> GapReport {
    let max = per_player.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum = per_player.iter().sum();
    GapReport {
        per_player,
        max,
        sum,
    }
}
