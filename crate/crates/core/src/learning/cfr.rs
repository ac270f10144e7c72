//! Counterfactual regret minimization over the UTC deviation DAG.
//!
//! One local regret minimizer sits at each decision node. Recommending a
//! deviation queries every learner and pushes the joint behavioral
//! strategy down into sequence form. Observing a utility on deviations
//! (`<G_A, A> + <G_B, B>` as a function of the deviation) runs one
//! reverse-topological value pass: observation nodes add their local
//! utility entry and sum their children, decision nodes take the
//! expectation under the strategy in play, and each decision node's
//! learner observes the vector of its children's values — the
//! counterfactual action values, not weighted by the node's own reach.
//! Under a pure comparator plan each node is reached at most once, so
//! summing the local regrets bounds the regret on the whole polytope.

use ndarray::Array2;
use std::sync::Arc;
use thiserror::Error;

use crate::utc::{behavioral_to_sequence, BehavioralUtcStrategy, NodeKind, UtcDag, UtcDeviation};

use super::regret::{LocalRegretMinimizer, RmKind};

/// A linear utility on deviations. `g_a` pairs with the `A` matrix entry
/// by entry; `g_b` is kept for interface uniformity and is zero in the
/// self-play loop (queries carry no utility).
#[derive(Debug, Clone)]
pub struct DeviationGradient {
    pub g_a: Array2<f64>,
    pub g_b: Array2<f64>,
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("deviation gradient has non-finite entries")]
    NonFiniteGradient,
    #[error("gradient shape {got:?} does not match the DAG ({expected:?})")]
    GradientShape {
        got: (usize, usize),
        expected: (usize, usize),
    },
}

impl DeviationGradient {
    pub fn zeros(dag: &UtcDag) -> Self {
        DeviationGradient {
            g_a: Array2::zeros((dag.real.d, dag.med.d)),
            g_b: Array2::zeros((dag.real.n_dps(), dag.med.n_dps())),
        }
    }

    /// The rank-one utility `G_A = g x^T` realized by playing `x` against
    /// utility gradient `g`: `<G_A, A> = <g, A x>`.
    pub fn outer(dag: &UtcDag, g: &[f64], x: &[f64]) -> Self {
        assert_eq!(g.len(), dag.real.d);
        assert_eq!(x.len(), dag.med.d);
        let mut out = DeviationGradient::zeros(dag);
        for (s, &gs) in g.iter().enumerate() {
            if gs == 0.0 {
                continue;
            }
            for (m, &xm) in x.iter().enumerate() {
                out.g_a[[s, m]] = gs * xm;
            }
        }
        out
    }

    /// `<G_A, A> + <G_B, B>`.
    pub fn score(&self, dev: &UtcDeviation) -> f64 {
        let mut v = 0.0;
        for (ga, a) in self.g_a.iter().zip(dev.a.iter()) {
            v += ga * a;
        }
        for (gb, b) in self.g_b.iter().zip(dev.b.iter()) {
            v += gb * b;
        }
        v
    }
}

/// Per-player learner state: the DAG, one local regret minimizer per
/// decision node, and the behavioral strategy currently in play.
#[derive(Debug, Clone)]
pub struct CfrState {
    dag: Arc<UtcDag>,
    learners: Vec<LocalRegretMinimizer>,
    current: BehavioralUtcStrategy,
    t: u64,
}

impl CfrState {
    pub fn new(dag: Arc<UtcDag>, kind: RmKind) -> Self {
        let learners = dag
            .decisions
            .iter()
            .map(|&id| LocalRegretMinimizer::new(kind, dag.nodes[id].out.len()))
            .collect();
        let current = BehavioralUtcStrategy::uniform(&dag);
        CfrState {
            dag,
            learners,
            current,
            t: 0,
        }
    }

    pub fn dag(&self) -> &Arc<UtcDag> {
        &self.dag
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn current(&self) -> &BehavioralUtcStrategy {
        &self.current
    }

    /// Queries every local learner and assembles the recommended
    /// deviation in sequence form.
    pub fn recommend(&mut self) -> UtcDeviation {
        for (dist, learner) in self.current.dists.iter_mut().zip(&mut self.learners) {
            dist.copy_from_slice(learner.next_strategy());
        }
        behavioral_to_sequence(&self.current, &self.dag)
            .expect("learner strategies are valid distributions")
    }

    /// Feeds a deviation utility back: one reverse-topological value pass,
    /// then every decision node's learner observes its children's values.
    pub fn observe(&mut self, grad: &DeviationGradient) -> Result<(), LearnError> {
        if grad.g_a.dim() != (self.dag.real.d, self.dag.med.d) {
            return Err(LearnError::GradientShape {
                got: grad.g_a.dim(),
                expected: (self.dag.real.d, self.dag.med.d),
            });
        }
        if grad.g_a.iter().any(|v| !v.is_finite()) || grad.g_b.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteGradient);
        }
        let n = self.dag.nodes.len();
        let mut val = vec![0.0; n];
        let mut q = Vec::new();
        for id in (0..n).rev() {
            let node = &self.dag.nodes[id];
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
                    q.clear();
                    q.extend(node.out.iter().map(|e| val[e.to]));
                    let di = node.decision_index;
                    let dist = &self.current.dists[di];
                    val[id] = dist.iter().zip(&q).map(|(p, v)| p * v).sum();
                    self.learners[di].observe(&q);
                }
            }
        }
        self.t += 1;
        Ok(())
    }

    /// Total utility of the strategy in play under `grad`; equals
    /// `grad.score(recommended deviation)`.
    pub fn expected_value(&self, grad: &DeviationGradient) -> f64 {
        let dev = behavioral_to_sequence(&self.current, &self.dag).expect("valid");
        grad.score(&dev)
    }
}
