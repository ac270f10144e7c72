//! Tree-form decision problems and sequence-form strategies.
//!
//! A tree-form decision problem (TFDP) is one player's view of a game:
//! a tree alternating decision points `j` (one per infoset) and
//! observation points, the latter identified with *sequences* — the root
//! sequence plus one sequence `ja` per decision point/action pair.
//!
//! A sequence-form strategy is a vector `x` indexed by sequences with
//! `x(root) = 1` and `x(p_j) = sum_a x(ja)` at every decision point
//! (Romanovskii 1962; von Stengel 1996). Pure strategies are the 0/1
//! vertices of that polytope; enumeration emits reduced plans only, so
//! sequences below an unchosen action stay 0.

use rand::Rng;
use thiserror::Error;

use super::game::{ExtensiveFormGame, GameError, GameNode, InfosetId, NodeId, PlayerId};

/// Default cap on how many pure strategies an enumeration may produce.
pub const DEFAULT_ENUMERATION_BOUND: usize = 1_000_000;

/// A decision point: the player's infoset seen from its own decision tree.
#[derive(Debug, Clone)]
pub struct DecisionPoint {
    /// The game infoset this decision point was derived from.
    pub infoset: InfosetId,
    /// The sequence the player holds when reaching this decision point.
    pub parent_seq: usize,
    /// Sequences `ja` occupy indices `first_seq .. first_seq + n_actions`.
    pub first_seq: usize,
    pub n_actions: usize,
}

#[derive(Debug, Clone)]
pub struct Tfdp {
    pub player: PlayerId,
    /// Decision points in depth-first, left-to-right discovery order.
    pub dps: Vec<DecisionPoint>,
    /// `C_sigma`: decision points whose parent sequence is `sigma`.
    pub seq_children: Vec<Vec<usize>>,
    /// Number of sequences, including the root sequence 0.
    pub d: usize,
    /// Human-readable sequence labels, `"@"` for the root.
    pub seq_labels: Vec<String>,
    /// Per sequence: `(decision point, action)` that produced it; root is `None`.
    pub seq_parent: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Error)]
pub enum TfdpError {
    #[error("strategy vector has dimension {got}, decision problem has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("pure-strategy count {count} exceeds enumeration bound {bound}")]
    EnumerationBound { count: u128, bound: usize },
}

impl Tfdp {
    /// Derives the decision problem faced by `player`.
    ///
    /// Assumes the game passed structural and perfect-recall validation;
    /// an inconsistent parent sequence inside an infoset (a recall defect)
    /// is still reported rather than silently accepted.
    pub fn from_game(game: &ExtensiveFormGame, player: PlayerId) -> Result<Tfdp, GameError> {
        let mut tfdp = Tfdp {
            player,
            dps: Vec::new(),
            seq_children: vec![Vec::new()],
            d: 1,
            seq_labels: vec!["@".to_string()],
            seq_parent: vec![None],
        };
        let mut infoset_dp: Vec<Option<usize>> = vec![None; game.infosets().len()];
        tfdp.walk(game, game.root(), 0, &mut infoset_dp)?;
        Ok(tfdp)
    }

    fn walk(
        &mut self,
        game: &ExtensiveFormGame,
        node: NodeId,
        cur_seq: usize,
        infoset_dp: &mut [Option<usize>],
    ) -> Result<(), GameError> {
        match game.node(node) {
            GameNode::Terminal { .. } => Ok(()),
            GameNode::Chance { outcomes } => {
                for &(_, child) in outcomes {
                    self.walk(game, child, cur_seq, infoset_dp)?;
                }
                Ok(())
            }
            GameNode::Player {
                player,
                infoset,
                children,
            } => {
                if *player != self.player {
                    for &child in children {
                        self.walk(game, child, cur_seq, infoset_dp)?;
                    }
                    return Ok(());
                }
                let info = game.infoset(*infoset);
                let dp = match infoset_dp[*infoset] {
                    Some(dp) => {
                        if self.dps[dp].parent_seq != cur_seq {
                            return Err(GameError::RecallViolation {
                                label: info.label.clone(),
                                a: self.seq_labels[self.dps[dp].parent_seq].clone(),
                                b: self.seq_labels[cur_seq].clone(),
                            });
                        }
                        dp
                    }
                    None => {
                        let dp = self.dps.len();
                        let first_seq = self.d;
                        self.dps.push(DecisionPoint {
                            infoset: *infoset,
                            parent_seq: cur_seq,
                            first_seq,
                            n_actions: info.actions.len(),
                        });
                        infoset_dp[*infoset] = Some(dp);
                        self.seq_children[cur_seq].push(dp);
                        for (a, action) in info.actions.iter().enumerate() {
                            self.seq_labels.push(format!("{}:{}", info.label, action));
                            self.seq_parent.push(Some((dp, a)));
                            self.seq_children.push(Vec::new());
                            debug_assert_eq!(self.seq_labels.len() - 1, first_seq + a);
                        }
                        self.d += info.actions.len();
                        dp
                    }
                };
                for (a, &child) in children.iter().enumerate() {
                    self.walk(game, child, self.seq_of(dp, a), infoset_dp)?;
                }
                Ok(())
            }
        }
    }

    pub fn n_dps(&self) -> usize {
        self.dps.len()
    }

    /// Sequence index of playing action `a` at decision point `dp`.
    pub fn seq_of(&self, dp: usize, a: usize) -> usize {
        self.dps[dp].first_seq + a
    }

    /// Max violation of the sequence-form constraints:
    /// root mass, flow conservation, and `[0, 1]` bounds.
    pub fn check_sequence_form(&self, x: &[f64]) -> Result<f64, TfdpError> {
        if x.len() != self.d {
            return Err(TfdpError::DimensionMismatch {
                got: x.len(),
                expected: self.d,
            });
        }
        let mut res = (x[0] - 1.0).abs();
        for dp in &self.dps {
            let sum: f64 = (0..dp.n_actions).map(|a| x[dp.first_seq + a]).sum();
            res = res.max((x[dp.parent_seq] - sum).abs());
        }
        for &v in x {
            res = res.max(-v).max(v - 1.0);
        }
        Ok(res.max(0.0))
    }

    /// Uniform behavioral strategy: one distribution per decision point.
    pub fn uniform_behavioral(&self) -> Vec<Vec<f64>> {
        self.dps
            .iter()
            .map(|dp| vec![1.0 / dp.n_actions as f64; dp.n_actions])
            .collect()
    }

    /// Random behavioral strategy with i.i.d. weights, normalized per point.
    pub fn random_behavioral<R: Rng>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        self.dps
            .iter()
            .map(|dp| {
                let mut w: Vec<f64> = (0..dp.n_actions).map(|_| rng.gen::<f64>() + 1e-9).collect();
                let s: f64 = w.iter().sum();
                for v in &mut w {
                    *v /= s;
                }
                w
            })
            .collect()
    }

    /// Pushes a behavioral strategy top-down into its sequence form.
    pub fn push_behavioral(&self, beh: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(beh.len(), self.dps.len());
        let mut x = vec![0.0; self.d];
        x[0] = 1.0;
        for (j, dp) in self.dps.iter().enumerate() {
            for a in 0..dp.n_actions {
                x[dp.first_seq + a] = x[dp.parent_seq] * beh[j][a];
            }
        }
        x
    }

    /// Number of reduced pure strategies (saturating).
    pub fn count_pure_strategies(&self) -> u128 {
        let mut memo: Vec<Option<u128>> = vec![None; self.dps.len()];
        fn below_seq(t: &Tfdp, seq: usize, memo: &mut Vec<Option<u128>>) -> u128 {
            let mut prod: u128 = 1;
            for &j in &t.seq_children[seq] {
                prod = prod.saturating_mul(at_dp(t, j, memo));
            }
            prod
        }
        fn at_dp(t: &Tfdp, j: usize, memo: &mut Vec<Option<u128>>) -> u128 {
            if let Some(c) = memo[j] {
                return c;
            }
            let mut total: u128 = 0;
            for a in 0..t.dps[j].n_actions {
                total = total.saturating_add(below_seq(t, t.seq_of(j, a), memo));
            }
            memo[j] = Some(total);
            total
        }
        below_seq(self, 0, &mut memo)
    }

    /// Visits every reduced pure strategy as a 0/1 sequence-form vector.
    pub fn for_each_pure_strategy(&self, mut f: impl FnMut(&[f64])) {
        let mut x = vec![0.0; self.d];
        x[0] = 1.0;
        let mut pending: Vec<usize> = self.seq_children[0].clone();
        self.pure_rec(&mut pending, &mut x, &mut f);
    }

    fn pure_rec(&self, pending: &mut Vec<usize>, x: &mut Vec<f64>, f: &mut impl FnMut(&[f64])) {
        let j = match pending.pop() {
            None => {
                f(x);
                return;
            }
            Some(j) => j,
        };
        let dp = &self.dps[j];
        for a in 0..dp.n_actions {
            let seq = dp.first_seq + a;
            x[seq] = 1.0;
            let added = self.seq_children[seq].len();
            pending.extend(self.seq_children[seq].iter().copied());
            self.pure_rec(pending, x, f);
            pending.truncate(pending.len() - added);
            x[seq] = 0.0;
        }
        pending.push(j);
    }

    /// Enumerates reduced pure strategies, failing above `bound`.
    pub fn enumerate_pure_strategies(&self, bound: usize) -> Result<Vec<Vec<f64>>, TfdpError> {
        let count = self.count_pure_strategies();
        if count > bound as u128 {
            return Err(TfdpError::EnumerationBound { count, bound });
        }
        let mut out = Vec::with_capacity(count as usize);
        self.for_each_pure_strategy(|x| out.push(x.to_vec()));
        Ok(out)
    }

    /// Best response to a linear utility `g` over sequences: bottom-up DP.
    /// Returns the value `max_x <g, x>` and an argmax pure strategy.
    pub fn best_response(&self, g: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(g.len(), self.d);
        let n = self.dps.len();
        let mut val = vec![0.0; n];
        let mut best = vec![0usize; n];
        for j in (0..n).rev() {
            let dp = &self.dps[j];
            let mut v = f64::NEG_INFINITY;
            for a in 0..dp.n_actions {
                let seq = dp.first_seq + a;
                let mut w = g[seq];
                for &j2 in &self.seq_children[seq] {
                    w += val[j2];
                }
                if w > v {
                    v = w;
                    best[j] = a;
                }
            }
            val[j] = v;
        }
        let mut total = g[0];
        for &j in &self.seq_children[0] {
            total += val[j];
        }
        // Materialize the argmax plan (unreached decision points keep action 0).
        let beh: Vec<Vec<f64>> = self
            .dps
            .iter()
            .enumerate()
            .map(|(j, dp)| {
                let mut dist = vec![0.0; dp.n_actions];
                dist[best[j]] = 1.0;
                dist
            })
            .collect();
        (total, self.push_behavioral(&beh))
    }

    /// A small hand-built decision problem: a single decision point with
    /// `k` actions. Useful for oracles and micro-tests.
    pub fn single_decision(k: usize) -> Tfdp {
        Tfdp {
            player: 0,
            dps: vec![DecisionPoint {
                infoset: 0,
                parent_seq: 0,
                first_seq: 1,
                n_actions: k,
            }],
            seq_children: {
                let mut c = vec![vec![0]];
                c.extend((0..k).map(|_| Vec::new()));
                c
            },
            d: k + 1,
            seq_labels: {
                let mut l = vec!["@".to_string()];
                l.extend((0..k).map(|a| format!("J:{a}")));
                l
            },
            seq_parent: {
                let mut p = vec![None];
                p.extend((0..k).map(|a| Some((0, a))));
                p
            },
        }
    }
}
