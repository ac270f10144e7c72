//! The UTC decision DAG over a pair of tree-form decision problems.
//!
//! Node kinds, writing `j` for real decision points, `s` for real
//! sequences, and `~` for their mediator counterparts:
//!
//! - `ObsGame(s, s~)` — observation: the game advances to some next
//!   decision point `j` in `C_s`; one child `Dec(j, s~)` per such `j`.
//! - `ObsRec(j, j~)` — observation: the mediator answers the query at
//!   `j~`; one child `Dec(j, j~a)` per action `a` of `j~`.
//! - `Dec(j, s~)` — decision: play an action `a` (child
//!   `ObsGame(ja, s~)`) or query some `j~` in `C_{s~}` (child
//!   `ObsRec(j, j~)`).
//!
//! The root is `ObsGame(root, root~)`. Every edge advances exactly one of
//! the two components by half a step, so breadth-first construction from
//! the root yields the nodes in topological order. Pairs `(root, s~)`
//! with `s~ != root~` are unreachable and pruned; their `A` entries are
//! identically zero and no constraint references them.

use std::sync::Arc;

use crate::game_core::Tfdp;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Observation state `(sequence, mediator sequence)`. Carries `A` mass.
    ObsGame { seq: usize, mseq: usize },
    /// Observation state `(decision point, mediator decision point)`
    /// reached by a query. Carries `B` mass.
    ObsRec { dp: usize, mdp: usize },
    /// Decision state `(decision point, mediator sequence)`.
    Dec { dp: usize, mseq: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    /// From an observation node: the game moves to decision point `dp`.
    ObserveDp { dp: usize },
    /// From an `ObsRec` node: the mediator recommends action `a`.
    ObserveRec { a: usize },
    /// From a decision node: play real action `a`.
    Play { a: usize },
    /// From a decision node: query mediator decision point `mdp`.
    Query { mdp: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct UtcEdge {
    pub to: NodeId,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone)]
pub struct UtcNode {
    pub kind: NodeKind,
    pub out: Vec<UtcEdge>,
    pub in_degree: u32,
    /// Position in [`UtcDag::decisions`] for decision nodes.
    pub decision_index: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DagStats {
    pub obs_game: usize,
    pub obs_rec: usize,
    pub decisions: usize,
    pub edges: usize,
    pub max_in_degree: u32,
    /// Unreachable `(sequence, mediator sequence)` pairs dropped from the
    /// full product space.
    pub pruned_obs_game: usize,
}

#[derive(Debug, Clone)]
pub struct UtcDag {
    pub real: Arc<Tfdp>,
    pub med: Arc<Tfdp>,
    /// Nodes in topological order (parents before children).
    pub nodes: Vec<UtcNode>,
    /// Decision nodes in topological order.
    pub decisions: Vec<NodeId>,
    obs_game_idx: Vec<usize>,
    obs_rec_idx: Vec<usize>,
    dec_idx: Vec<usize>,
    pub stats: DagStats,
}

const NONE: usize = usize::MAX;

impl UtcDag {
    /// The deviation DAG of a decision problem against itself: the setting
    /// for linear self-maps of one player's strategy polytope.
    pub fn self_pair(tfdp: &Arc<Tfdp>) -> UtcDag {
        UtcDag::build(tfdp.clone(), tfdp.clone())
    }

    /// General pair: real problem `real`, mediator problem `med`; the
    /// represented maps send mediator strategies into the real polytope.
    pub fn build(real: Arc<Tfdp>, med: Arc<Tfdp>) -> UtcDag {
        let (rd, md) = (real.d, med.d);
        let (rj, mj) = (real.n_dps(), med.n_dps());
        let mut dag = UtcDag {
            obs_game_idx: vec![NONE; rd * md],
            obs_rec_idx: vec![NONE; rj.max(1) * mj.max(1)],
            dec_idx: vec![NONE; rj.max(1) * md],
            real,
            med,
            nodes: Vec::new(),
            decisions: Vec::new(),
            stats: DagStats::default(),
        };
        let root = dag.intern(NodeKind::ObsGame { seq: 0, mseq: 0 });
        let mut head = root;
        // Breadth-first expansion; edges always advance one component, so
        // FIFO order is topological.
        while head < dag.nodes.len() {
            dag.expand(head);
            head += 1;
        }
        for n in &dag.nodes {
            dag.stats.edges += n.out.len();
            dag.stats.max_in_degree = dag.stats.max_in_degree.max(n.in_degree);
            match n.kind {
                NodeKind::ObsGame { .. } => dag.stats.obs_game += 1,
                NodeKind::ObsRec { .. } => dag.stats.obs_rec += 1,
                NodeKind::Dec { .. } => dag.stats.decisions += 1,
            }
        }
        dag.stats.pruned_obs_game = rd * md - dag.stats.obs_game;
        dag
    }

    fn slot(&mut self, kind: NodeKind) -> &mut usize {
        match kind {
            NodeKind::ObsGame { seq, mseq } => &mut self.obs_game_idx[seq * self.med.d + mseq],
            NodeKind::ObsRec { dp, mdp } => {
                let w = self.med.n_dps().max(1);
                &mut self.obs_rec_idx[dp * w + mdp]
            }
            NodeKind::Dec { dp, mseq } => &mut self.dec_idx[dp * self.med.d + mseq],
        }
    }

    fn intern(&mut self, kind: NodeKind) -> NodeId {
        let next = self.nodes.len();
        let slot = self.slot(kind);
        if *slot != NONE {
            return *slot;
        }
        *slot = next;
        self.nodes.push(UtcNode {
            kind,
            out: Vec::new(),
            in_degree: 0,
            decision_index: NONE,
        });
        if let NodeKind::Dec { .. } = kind {
            self.nodes[next].decision_index = self.decisions.len();
            self.decisions.push(next);
        }
        next
    }

    fn link(&mut self, from: NodeId, kind: NodeKind, label: EdgeLabel) {
        let to = self.intern(kind);
        self.nodes[to].in_degree += 1;
        self.nodes[from].out.push(UtcEdge { to, label });
    }

    fn expand(&mut self, id: NodeId) {
        match self.nodes[id].kind {
            NodeKind::ObsGame { seq, mseq } => {
                let children = self.real.seq_children[seq].clone();
                for dp in children {
                    self.link(id, NodeKind::Dec { dp, mseq }, EdgeLabel::ObserveDp { dp });
                }
            }
            NodeKind::ObsRec { dp, mdp } => {
                for a in 0..self.med.dps[mdp].n_actions {
                    let mseq = self.med.seq_of(mdp, a);
                    self.link(id, NodeKind::Dec { dp, mseq }, EdgeLabel::ObserveRec { a });
                }
            }
            NodeKind::Dec { dp, mseq } => {
                for a in 0..self.real.dps[dp].n_actions {
                    let seq = self.real.seq_of(dp, a);
                    self.link(id, NodeKind::ObsGame { seq, mseq }, EdgeLabel::Play { a });
                }
                let queries = self.med.seq_children[mseq].clone();
                for mdp in queries {
                    self.link(id, NodeKind::ObsRec { dp, mdp }, EdgeLabel::Query { mdp });
                }
            }
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn obs_game_id(&self, seq: usize, mseq: usize) -> Option<NodeId> {
        match self.obs_game_idx[seq * self.med.d + mseq] {
            NONE => None,
            id => Some(id),
        }
    }

    pub fn obs_rec_id(&self, dp: usize, mdp: usize) -> Option<NodeId> {
        match self.obs_rec_idx[dp * self.med.n_dps().max(1) + mdp] {
            NONE => None,
            id => Some(id),
        }
    }

    pub fn dec_id(&self, dp: usize, mseq: usize) -> Option<NodeId> {
        match self.dec_idx[dp * self.med.d + mseq] {
            NONE => None,
            id => Some(id),
        }
    }

    /// Whether the real and mediator problems are the same decision problem.
    pub fn is_self_pair(&self) -> bool {
        Arc::ptr_eq(&self.real, &self.med)
            || (self.real.d == self.med.d && self.real.n_dps() == self.med.n_dps())
    }

    /// Top-down reach pass: node mass under a behavioral deviator strategy.
    /// Observation edges copy mass to each child; decision edges split it
    /// by the node's distribution.
    pub fn reach(&self, dists: &[Vec<f64>]) -> Vec<f64> {
        let mut mass = vec![0.0; self.nodes.len()];
        mass[0] = 1.0;
        for (id, node) in self.nodes.iter().enumerate() {
            let m = mass[id];
            if m == 0.0 {
                continue;
            }
            match node.kind {
                NodeKind::Dec { .. } => {
                    let dist = &dists[node.decision_index];
                    for (e, &p) in node.out.iter().zip(dist) {
                        mass[e.to] += m * p;
                    }
                }
                _ => {
                    for e in &node.out {
                        mass[e.to] += m;
                    }
                }
            }
        }
        mass
    }
}
