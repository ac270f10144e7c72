//! Sequence-form representation of UTC deviations and its constraint
//! system.
//!
//! For a pair `(A, B)` of mass matrices the constraints are, per decision
//! state `(j, s~)`:
//!
//! ```text
//! A(p_j, s~) + B(j, p_{s~}) = sum_a A(ja, s~) + sum_{j~ in C_{s~}} B(j, j~)
//! ```
//!
//! with `B(j, p_root~) := 0`, plus `A(root, root~) = 1`,
//! `A(root, s~) = 0` for `s~ != root~`, and `A, B >= 0`. The left side is
//! the mass entering the decision state (from the game observation that
//! produced `j`, or from the recommendation observation that produced
//! `s~`), the right side the mass leaving it (plays and queries).

use ndarray::Array2;
use rand::Rng;
use thiserror::Error;

use crate::game_core::{CONSTRUCTION_TOL, INPUT_TOL};

use super::dag::{NodeKind, UtcDag};

/// A deviation in sequence form: `A` maps mediator-sequence space to
/// real-sequence space (the linear map is `x -> A x`), `B` carries the
/// query masses.
#[derive(Debug, Clone, PartialEq)]
pub struct UtcDeviation {
    /// Real sequences x mediator sequences.
    pub a: Array2<f64>,
    /// Real decision points x mediator decision points.
    pub b: Array2<f64>,
}

#[derive(Debug, Error)]
pub enum UtcError {
    #[error("deviation has shape A{a:?}/B{b:?}, DAG expects A{ea:?}/B{eb:?}")]
    ShapeMismatch {
        a: (usize, usize),
        b: (usize, usize),
        ea: (usize, usize),
        eb: (usize, usize),
    },
    #[error("strategy vector has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("behavioral strategy invalid at decision node {node}: {reason}")]
    BadBehavioral { node: usize, reason: String },
    #[error("deviation violates {constraint} by {residual}")]
    InfeasibleDeviation {
        constraint: ConstraintId,
        residual: f64,
    },
    #[error("input strategy violates the sequence-form constraints by {residual}")]
    InfeasibleStrategy { residual: f64 },
    #[error("applying the deviation produced an infeasible strategy (residual {residual})")]
    InfeasibleImage { residual: f64 },
    #[error("pure-deviation count {count} exceeds enumeration bound {bound}")]
    EnumerationBound { count: u128, bound: usize },
    #[error("row {row}: functional is negative somewhere (canonical root value {value})")]
    NegativeFunctional { row: usize, value: f64 },
    #[error("completion produced negative mass {value} at B[{dp},{mdp}]: A is not a polytope-to-polytope map")]
    NegativeCompletion { dp: usize, mdp: usize, value: f64 },
}

impl UtcDeviation {
    pub fn zeros(dag: &UtcDag) -> UtcDeviation {
        UtcDeviation {
            a: Array2::zeros((dag.real.d, dag.med.d)),
            b: Array2::zeros((dag.real.n_dps(), dag.med.n_dps())),
        }
    }

    /// The constant deviation that plays `x0` and never queries.
    pub fn constant(dag: &UtcDag, x0: &[f64]) -> Result<UtcDeviation, UtcError> {
        if x0.len() != dag.real.d {
            return Err(UtcError::DimensionMismatch {
                got: x0.len(),
                expected: dag.real.d,
            });
        }
        let mut dev = UtcDeviation::zeros(dag);
        for (s, &v) in x0.iter().enumerate() {
            dev.a[[s, 0]] = v;
        }
        Ok(dev)
    }

    /// The identity deviation of a self-pair DAG: copy every
    /// recommendation. `A` is the identity matrix; `B` marks the
    /// query-own-decision-point pattern.
    pub fn identity(dag: &UtcDag) -> UtcDeviation {
        debug_assert!(dag.is_self_pair());
        let mut dev = UtcDeviation::zeros(dag);
        for s in 0..dag.real.d {
            dev.a[[s, s]] = 1.0;
        }
        for j in 0..dag.real.n_dps() {
            dev.b[[j, j]] = 1.0;
        }
        dev
    }

    pub fn shape_matches(&self, dag: &UtcDag) -> bool {
        self.a.dim() == (dag.real.d, dag.med.d)
            && self.b.dim() == (dag.real.n_dps(), dag.med.n_dps())
    }
}

/// A deviator behavioral strategy: one distribution over outgoing edges
/// per decision node, indexed like [`UtcDag::decisions`].
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralUtcStrategy {
    pub dists: Vec<Vec<f64>>,
}

impl BehavioralUtcStrategy {
    pub fn uniform(dag: &UtcDag) -> BehavioralUtcStrategy {
        BehavioralUtcStrategy {
            dists: dag
                .decisions
                .iter()
                .map(|&id| {
                    let k = dag.nodes[id].out.len();
                    vec![1.0 / k as f64; k]
                })
                .collect(),
        }
    }

    pub fn random<R: Rng>(dag: &UtcDag, rng: &mut R) -> BehavioralUtcStrategy {
        BehavioralUtcStrategy {
            dists: dag
                .decisions
                .iter()
                .map(|&id| {
                    let k = dag.nodes[id].out.len();
                    let mut w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-9).collect();
                    let s: f64 = w.iter().sum();
                    for v in &mut w {
                        *v /= s;
                    }
                    w
                })
                .collect(),
        }
    }

    /// Deterministic plan from an edge chooser (called per decision node).
    pub fn pure(dag: &UtcDag, mut choose: impl FnMut(&UtcDag, usize) -> usize) -> Self {
        BehavioralUtcStrategy {
            dists: dag
                .decisions
                .iter()
                .map(|&id| {
                    let k = dag.nodes[id].out.len();
                    let mut dist = vec![0.0; k];
                    dist[choose(dag, id).min(k - 1)] = 1.0;
                    dist
                })
                .collect(),
        }
    }

    pub fn validate(&self, dag: &UtcDag) -> Result<(), UtcError> {
        if self.dists.len() != dag.decisions.len() {
            return Err(UtcError::BadBehavioral {
                node: 0,
                reason: format!(
                    "{} distributions for {} decision nodes",
                    self.dists.len(),
                    dag.decisions.len()
                ),
            });
        }
        for (i, &id) in dag.decisions.iter().enumerate() {
            let dist = &self.dists[i];
            if dist.len() != dag.nodes[id].out.len() {
                return Err(UtcError::BadBehavioral {
                    node: id,
                    reason: "arity mismatch".into(),
                });
            }
            if dist.iter().any(|&p| p < 0.0) {
                return Err(UtcError::BadBehavioral {
                    node: id,
                    reason: "negative probability".into(),
                });
            }
            let s: f64 = dist.iter().sum();
            if (s - 1.0).abs() > CONSTRUCTION_TOL {
                return Err(UtcError::BadBehavioral {
                    node: id,
                    reason: format!("probabilities sum to {s}"),
                });
            }
        }
        Ok(())
    }
}

/// Converts a behavioral deviator strategy to sequence form by one
/// top-down reach pass (a node's mass is the sum over incoming edges of
/// parent mass times edge probability).
pub fn behavioral_to_sequence(
    beh: &BehavioralUtcStrategy,
    dag: &UtcDag,
) -> Result<UtcDeviation, UtcError> {
    beh.validate(dag)?;
    let mass = dag.reach(&beh.dists);
    let mut dev = UtcDeviation::zeros(dag);
    for (id, node) in dag.nodes.iter().enumerate() {
        match node.kind {
            NodeKind::ObsGame { seq, mseq } => dev.a[[seq, mseq]] = mass[id],
            NodeKind::ObsRec { dp, mdp } => dev.b[[dp, mdp]] = mass[id],
            NodeKind::Dec { .. } => {}
        }
    }
    Ok(dev)
}

/// Identifies one constraint of the system, in canonical scan order:
/// root mass, root zeros, flow conservation, then nonnegativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintId {
    RootMass,
    RootZero { mseq: usize },
    Flow { dp: usize, mseq: usize },
    NonnegA { seq: usize, mseq: usize },
    NonnegB { dp: usize, mdp: usize },
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintId::RootMass => write!(f, "root mass A[0,0] = 1"),
            ConstraintId::RootZero { mseq } => write!(f, "root row A[0,{mseq}] = 0"),
            ConstraintId::Flow { dp, mseq } => {
                write!(f, "flow conservation at decision state ({dp},{mseq})")
            }
            ConstraintId::NonnegA { seq, mseq } => write!(f, "A[{seq},{mseq}] >= 0"),
            ConstraintId::NonnegB { dp, mdp } => write!(f, "B[{dp},{mdp}] >= 0"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstraintReport {
    pub max_residual: f64,
    /// First constraint attaining the max residual, when it is nonzero.
    pub worst: Option<ConstraintId>,
}

/// Exact residual report over the whole constraint system.
pub fn check_constraints(dev: &UtcDeviation, dag: &UtcDag) -> Result<ConstraintReport, UtcError> {
    if !dev.shape_matches(dag) {
        return Err(UtcError::ShapeMismatch {
            a: dev.a.dim(),
            b: dev.b.dim(),
            ea: (dag.real.d, dag.med.d),
            eb: (dag.real.n_dps(), dag.med.n_dps()),
        });
    }
    let mut max = 0.0f64;
    let mut worst = None;
    let mut note = |r: f64, id: ConstraintId| {
        if r > max {
            max = r;
            worst = Some(id);
        }
    };
    note((dev.a[[0, 0]] - 1.0).abs(), ConstraintId::RootMass);
    for mseq in 1..dag.med.d {
        note(dev.a[[0, mseq]].abs(), ConstraintId::RootZero { mseq });
    }
    for dp in 0..dag.real.n_dps() {
        let rdp = &dag.real.dps[dp];
        for mseq in 0..dag.med.d {
            let mut lhs = dev.a[[rdp.parent_seq, mseq]];
            if let Some(&(mdp, _)) = dag.med.seq_parent[mseq].as_ref() {
                lhs += dev.b[[dp, mdp]];
            }
            let mut rhs = 0.0;
            for a in 0..rdp.n_actions {
                rhs += dev.a[[rdp.first_seq + a, mseq]];
            }
            for &mdp in &dag.med.seq_children[mseq] {
                rhs += dev.b[[dp, mdp]];
            }
            note((lhs - rhs).abs(), ConstraintId::Flow { dp, mseq });
        }
    }
    for ((seq, mseq), &v) in dev.a.indexed_iter() {
        if v < 0.0 {
            note(-v, ConstraintId::NonnegA { seq, mseq });
        }
    }
    for ((dp, mdp), &v) in dev.b.indexed_iter() {
        if v < 0.0 {
            note(-v, ConstraintId::NonnegB { dp, mdp });
        }
    }
    Ok(ConstraintReport {
        max_residual: max,
        worst,
    })
}

/// Applies the deviation to a feasible strategy: `x -> A x`. Both the
/// deviation and the input are accepted up to the input tolerance, and
/// the image is verified to be sequence-form feasible.
pub fn apply_deviation(
    dev: &UtcDeviation,
    x: &[f64],
    dag: &UtcDag,
) -> Result<Vec<f64>, UtcError> {
    let report = check_constraints(dev, dag)?;
    if report.max_residual > INPUT_TOL {
        return Err(UtcError::InfeasibleDeviation {
            constraint: report.worst.unwrap_or(ConstraintId::RootMass),
            residual: report.max_residual,
        });
    }
    let xres = dag
        .med
        .check_sequence_form(x)
        .map_err(|_| UtcError::DimensionMismatch {
            got: x.len(),
            expected: dag.med.d,
        })?;
    if xres > INPUT_TOL {
        return Err(UtcError::InfeasibleStrategy { residual: xres });
    }
    let mut y = vec![0.0; dag.real.d];
    for (s, row) in dev.a.outer_iter().enumerate() {
        y[s] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    let yres = dag.real.check_sequence_form(&y).expect("dims match");
    if yres > INPUT_TOL {
        return Err(UtcError::InfeasibleImage { residual: yres });
    }
    Ok(y)
}

/// A pure deviator plan, stored sparsely as the observation states it
/// reaches (each with mass exactly one).
#[derive(Debug, Clone, Default)]
pub struct PureDeviation {
    pub a_ones: Vec<(usize, usize)>,
    pub b_ones: Vec<(usize, usize)>,
}

impl PureDeviation {
    pub fn to_deviation(&self, dag: &UtcDag) -> UtcDeviation {
        let mut dev = UtcDeviation::zeros(dag);
        for &(s, m) in &self.a_ones {
            dev.a[[s, m]] = 1.0;
        }
        for &(j, m) in &self.b_ones {
            dev.b[[j, m]] = 1.0;
        }
        dev
    }

    /// `A x` without materializing the dense matrix.
    pub fn apply(&self, x: &[f64], real_d: usize) -> Vec<f64> {
        let mut y = vec![0.0; real_d];
        for &(s, m) in &self.a_ones {
            y[s] += x[m];
        }
        y
    }

    /// `<G_A, A> + <G_B, B>` for a gradient pair.
    pub fn score(&self, g_a: &Array2<f64>, g_b: &Array2<f64>) -> f64 {
        let mut v = 0.0;
        for &(s, m) in &self.a_ones {
            v += g_a[[s, m]];
        }
        for &(j, m) in &self.b_ones {
            v += g_b[[j, m]];
        }
        v
    }
}

/// Number of reduced pure deviator plans (saturating).
pub fn count_pure_deviations(dag: &UtcDag) -> u128 {
    // plans(decision v) = sum over edges of prod over decision children of
    // the chosen edge's target. Observation targets multiply their
    // decision children because a plan must cover every contingency.
    let mut memo: Vec<Option<u128>> = vec![None; dag.nodes.len()];
    fn obs_product(dag: &UtcDag, id: usize, memo: &mut Vec<Option<u128>>) -> u128 {
        let mut prod: u128 = 1;
        for e in &dag.nodes[id].out {
            prod = prod.saturating_mul(dec_count(dag, e.to, memo));
        }
        prod
    }
    fn dec_count(dag: &UtcDag, id: usize, memo: &mut Vec<Option<u128>>) -> u128 {
        if let Some(c) = memo[id] {
            return c;
        }
        let mut total: u128 = 0;
        for e in &dag.nodes[id].out {
            total = total.saturating_add(obs_product(dag, e.to, memo));
        }
        let total = total.max(1);
        memo[id] = Some(total);
        total
    }
    obs_product(dag, dag.root(), &mut memo)
}

/// Visits every reduced pure deviator plan. Under a pure plan each state
/// is reached by at most one action/query interleaving, so masses are 0/1
/// and the recursion never revisits a node within one plan.
pub fn for_each_pure_deviation(dag: &UtcDag, mut f: impl FnMut(&PureDeviation)) {
    let mut plan = PureDeviation::default();
    plan.a_ones.push((0, 0));
    let mut pending: Vec<usize> = dag.nodes[dag.root()].out.iter().map(|e| e.to).collect();
    rec(dag, &mut pending, &mut plan, &mut f);

    fn rec(
        dag: &UtcDag,
        pending: &mut Vec<usize>,
        plan: &mut PureDeviation,
        f: &mut impl FnMut(&PureDeviation),
    ) {
        let v = match pending.pop() {
            None => {
                f(plan);
                return;
            }
            Some(v) => v,
        };
        for e in &dag.nodes[v].out {
            let target = e.to;
            let a_mark = match dag.nodes[target].kind {
                NodeKind::ObsGame { seq, mseq } => {
                    plan.a_ones.push((seq, mseq));
                    true
                }
                NodeKind::ObsRec { dp, mdp } => {
                    plan.b_ones.push((dp, mdp));
                    false
                }
                NodeKind::Dec { .. } => unreachable!("decision children are observations"),
            };
            let before = pending.len();
            pending.extend(dag.nodes[target].out.iter().map(|e| e.to));
            rec(dag, pending, plan, f);
            pending.truncate(before);
            if a_mark {
                plan.a_ones.pop();
            } else {
                plan.b_ones.pop();
            }
        }
        pending.push(v);
    }
}

/// Enumerates pure deviations as dense pairs, failing above `bound`.
pub fn enumerate_pure_deviations(
    dag: &UtcDag,
    bound: usize,
) -> Result<Vec<UtcDeviation>, UtcError> {
    let count = count_pure_deviations(dag);
    if count > bound as u128 {
        return Err(UtcError::EnumerationBound { count, bound });
    }
    let mut out = Vec::with_capacity(count as usize);
    for_each_pure_deviation(dag, |p| out.push(p.to_deviation(dag)));
    Ok(out)
}

/// Debug/interchange export: dense matrices with sequence labels and the
/// current constraint residual.
pub fn export_deviation_json(dev: &UtcDeviation, dag: &UtcDag) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = dev.a.outer_iter().map(|r| r.to_vec()).collect();
    let brows: Vec<Vec<f64>> = dev.b.outer_iter().map(|r| r.to_vec()).collect();
    let residual = check_constraints(dev, dag)
        .map(|r| r.max_residual)
        .unwrap_or(f64::NAN);
    serde_json::json!({
        "A": {
            "rows": dag.real.seq_labels,
            "cols": dag.med.seq_labels,
            "data": rows,
        },
        "B": {
            "rows": (0..dag.real.n_dps()).map(|j| dag.real.seq_labels[dag.real.dps[j].first_seq].split(':').next().unwrap_or("").to_string()).collect::<Vec<_>>(),
            "cols": (0..dag.med.n_dps()).map(|j| dag.med.seq_labels[dag.med.dps[j].first_seq].split(':').next().unwrap_or("").to_string()).collect::<Vec<_>>(),
            "data": brows,
        },
        "residual": residual,
    })
}


#[cfg(test)]
mod export_tests {
    use super::*;
    use crate::game_core::Tfdp;
    use crate::utc::UtcDag;
    use std::sync::Arc;

    #[test]
    fn export_carries_labels_and_residual() {
        let t = Arc::new(Tfdp::single_decision(2));
        let dag = UtcDag::self_pair(&t);
        let dev = UtcDeviation::identity(&dag);
        let doc = export_deviation_json(&dev, &dag);
        assert_eq!(doc["A"]["rows"].as_array().unwrap().len(), 3);
        assert_eq!(doc["A"]["rows"][0], "@");
        assert_eq!(doc["A"]["data"][1][1], 1.0);
        assert_eq!(doc["B"]["data"][0][0], 1.0);
        assert!(doc["residual"].as_f64().unwrap() <= 1e-12);
    }
}
