//! A validated game bundled with per-player decision problems and a
//! flattened terminal table for utility and gradient evaluation.

use std::sync::Arc;

use thiserror::Error;

use super::game::{ExtensiveFormGame, GameError, GameNode, PlayerId};
use super::tfdp::Tfdp;
use super::INPUT_TOL;

/// One terminal of the game, with everything gradient evaluation needs:
/// chance reach folded in, and each player's sequence at the leaf.
#[derive(Debug, Clone)]
pub struct TerminalRecord {
    pub chance_reach: f64,
    pub utils: Vec<f64>,
    pub seqs: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("player {0} out of range")]
    PlayerOutOfRange(PlayerId),
    #[error("strategy for player {player} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        player: PlayerId,
        got: usize,
        expected: usize,
    },
    #[error("strategy for player {player} violates the sequence-form constraints by {residual}")]
    InfeasibleStrategy { player: PlayerId, residual: f64 },
}

#[derive(Debug, Clone)]
pub struct GameModel {
    pub game: ExtensiveFormGame,
    pub tfdps: Vec<Arc<Tfdp>>,
    pub terminals: Vec<TerminalRecord>,
}

impl GameModel {
    /// Validates the game, derives every player's decision problem, and
    /// flattens the terminals.
    pub fn new(game: ExtensiveFormGame) -> Result<GameModel, GameError> {
        game.validate_structure()?;
        super::game::validate_perfect_recall(&game)?;
        let tfdps: Vec<Arc<Tfdp>> = (0..game.num_players())
            .map(|p| Tfdp::from_game(&game, p).map(Arc::new))
            .collect::<Result<_, _>>()?;
        let mut terminals = Vec::new();
        collect_terminals(
            &game,
            &tfdps,
            game.root(),
            1.0,
            &mut vec![0; game.num_players()],
            &mut terminals,
        );
        Ok(GameModel {
            game,
            tfdps,
            terminals,
        })
    }

    pub fn num_players(&self) -> usize {
        self.game.num_players()
    }

    fn check_profile_entry(&self, k: PlayerId, x: &[f64]) -> Result<(), ModelError> {
        let t = &self.tfdps[k];
        let residual = t
            .check_sequence_form(x)
            .map_err(|_| ModelError::DimensionMismatch {
                player: k,
                got: x.len(),
                expected: t.d,
            })?;
        if residual > INPUT_TOL {
            return Err(ModelError::InfeasibleStrategy {
                player: k,
                residual,
            });
        }
        Ok(())
    }

    /// Gradient of player `i`'s expected utility in its own strategy:
    /// `g(s) = sum over terminals at sequence s of
    ///         u_i(z) * chance(z) * prod_{k != i} x_k(seq_k(z))`,
    /// so that `<g, x_i>` is the expected utility for any feasible `x_i`.
    /// `profile[i]` is ignored.
    pub fn utility_gradient(
        &self,
        i: PlayerId,
        profile: &[Vec<f64>],
    ) -> Result<Vec<f64>, ModelError> {
        if i >= self.num_players() {
            return Err(ModelError::PlayerOutOfRange(i));
        }
        for k in 0..self.num_players() {
            if k != i {
                self.check_profile_entry(k, &profile[k])?;
            }
        }
        let mut g = vec![0.0; self.tfdps[i].d];
        for t in &self.terminals {
            let mut w = t.chance_reach;
            for k in 0..self.num_players() {
                if k != i {
                    w *= profile[k][t.seqs[k]];
                }
            }
            g[t.seqs[i]] += t.utils[i] * w;
        }
        Ok(g)
    }

    /// Expected utility of every player under a profile of feasible
    /// sequence-form strategies.
    pub fn expected_utility(&self, profile: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        for k in 0..self.num_players() {
            self.check_profile_entry(k, &profile[k])?;
        }
        let mut out = vec![0.0; self.num_players()];
        for t in &self.terminals {
            let mut w = t.chance_reach;
            for k in 0..self.num_players() {
                w *= profile[k][t.seqs[k]];
            }
            for k in 0..self.num_players() {
                out[k] += t.utils[k] * w;
            }
        }
        Ok(out)
    }

    pub fn utility_range(&self) -> (f64, f64) {
        self.game.utility_range()
    }
}

fn collect_terminals(
    game: &ExtensiveFormGame,
    tfdps: &[Arc<Tfdp>],
    node: usize,
    chance: f64,
    seqs: &mut Vec<usize>,
    out: &mut Vec<TerminalRecord>,
) {
    match game.node(node) {
        GameNode::Terminal { utils } => out.push(TerminalRecord {
            chance_reach: chance,
            utils: utils.clone(),
            seqs: seqs.clone(),
        }),
        GameNode::Chance { outcomes } => {
            for &(p, child) in outcomes {
                collect_terminals(game, tfdps, child, chance * p, seqs, out);
            }
        }
        GameNode::Player {
            player,
            infoset,
            children,
        } => {
            // The decision point for this infoset exists because the TFDP
            // walk visited the whole tree.
            let dp = tfdps[*player]
                .dps
                .iter()
                .position(|d| d.infoset == *infoset)
                .expect("infoset has a decision point");
            let saved = seqs[*player];
            for (a, &child) in children.iter().enumerate() {
                seqs[*player] = tfdps[*player].seq_of(dp, a);
                collect_terminals(game, tfdps, child, chance, seqs, out);
            }
            seqs[*player] = saved;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use rand::Rng;

    fn pure_by_labels(t: &Tfdp, chosen: &[&str]) -> Vec<f64> {
        // Behavioral plan selecting the labeled action at each decision
        // point (unreached points default to action 0).
        let beh: Vec<Vec<f64>> = t
            .dps
            .iter()
            .map(|dp| {
                let mut dist = vec![0.0; dp.n_actions];
                let mut pick = 0;
                for a in 0..dp.n_actions {
                    if chosen.contains(&t.seq_labels[dp.first_seq + a].as_str()) {
                        pick = a;
                    }
                }
                dist[pick] = 1.0;
                dist
            })
            .collect();
        t.push_behavioral(&beh)
    }

    #[test]
    fn gradient_on_signal_guess_hand_values() {
        let model = GameModel::new(games::signal_guess()).unwrap();
        let t1 = &model.tfdps[0];
        let t2 = &model.tfdps[1];
        // Opponent plays f1 and g1 deterministically.
        let x2 = pure_by_labels(t2, &["F:f1", "G:g1"]);
        let profile = vec![vec![0.0; t1.d], x2];
        let g = model.utility_gradient(0, &profile).unwrap();
        let idx = |l: &str| t1.seq_labels.iter().position(|s| s == l).unwrap();
        let w = (1.0 / 3.0) * 0.5;
        assert!((g[idx("D:d1")] - w).abs() < 1e-12);
        assert!((g[idx("D:d2")] + 10.0 * w).abs() < 1e-12);
        assert!((g[idx("E:e1")] - w).abs() < 1e-12);
        assert!((g[idx("E:e2")] + 10.0 * w).abs() < 1e-12);
        for l in ["@", "A:a1", "A:a2", "B:b1", "B:b2", "C:c1", "C:c2"] {
            assert_eq!(g[idx(l)], 0.0);
        }
    }

    #[test]
    fn gradient_is_zero_in_zero_utility_game() {
        use crate::game_core::GameBuilder;
        let mut b = GameBuilder::new(2);
        let t1 = b.terminal(vec![0.0, 0.0]);
        let t2 = b.terminal(vec![0.0, 0.0]);
        let n = b.player(
            0,
            "X",
            &["l".to_string(), "r".to_string()],
            vec![t1, t2],
        );
        let model = GameModel::new(b.finish(n).unwrap()).unwrap();
        let x2 = vec![1.0];
        let g = model
            .utility_gradient(0, &[vec![0.0; 3], x2])
            .unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn expected_utility_consistent_with_gradient() {
        let model = GameModel::new(games::kuhn(2, 3).unwrap()).unwrap();
        let mut rng = crate::test_rng(3);
        for _ in 0..20 {
            let profile: Vec<Vec<f64>> = model
                .tfdps
                .iter()
                .map(|t| t.push_behavioral(&t.random_behavioral(&mut rng)))
                .collect();
            let u = model.expected_utility(&profile).unwrap();
            for i in 0..2 {
                let g = model.utility_gradient(i, &profile).unwrap();
                let dot: f64 = g.iter().zip(&profile[i]).map(|(a, b)| a * b).sum();
                assert!((dot - u[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn bilinearity_in_each_player() {
        let model = GameModel::new(games::kuhn(2, 3).unwrap()).unwrap();
        let mut rng = crate::test_rng(11);
        for _ in 0..20 {
            let xs: Vec<Vec<f64>> = model
                .tfdps
                .iter()
                .map(|t| t.push_behavioral(&t.random_behavioral(&mut rng)))
                .collect();
            let alt: Vec<f64> =
                model.tfdps[0].push_behavioral(&model.tfdps[0].random_behavioral(&mut rng));
            let lam: f64 = rng.gen();
            let mix: Vec<f64> = xs[0]
                .iter()
                .zip(&alt)
                .map(|(a, b)| lam * a + (1.0 - lam) * b)
                .collect();
            let u_mix = model.expected_utility(&[mix, xs[1].clone()]).unwrap()[0];
            let u_a = model.expected_utility(&xs).unwrap()[0];
            let u_b = model
                .expected_utility(&[alt, xs[1].clone()])
                .unwrap()[0];
            assert!((u_mix - (lam * u_a + (1.0 - lam) * u_b)).abs() <= 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // Directional finite differences inside the strategy polytope.
        let model = GameModel::new(games::signal_guess()).unwrap();
        let mut rng = crate::test_rng(5);
        let t1 = &model.tfdps[0];
        for _ in 0..10 {
            let x: Vec<f64> = t1.push_behavioral(&t1.random_behavioral(&mut rng));
            let y: Vec<f64> = t1.push_behavioral(&t1.random_behavioral(&mut rng));
            let x2 = model.tfdps[1]
                .push_behavioral(&model.tfdps[1].random_behavioral(&mut rng));
            let profile = vec![x.clone(), x2.clone()];
            let g = model.utility_gradient(0, &profile).unwrap();
            let h = 1e-6;
            let xh: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (1.0 - h) * a + h * b)
                .collect();
            let u0 = model.expected_utility(&profile).unwrap()[0];
            let u1 = model.expected_utility(&[xh, x2]).unwrap()[0];
            let fd = (u1 - u0) / h;
            let exact: f64 = g
                .iter()
                .zip(y.iter().zip(&x))
                .map(|(gi, (yi, xi))| gi * (yi - xi))
                .sum();
            assert!((fd - exact).abs() <= 1e-6, "fd {fd} vs exact {exact}");
        }
    }

    #[test]
    fn infeasible_strategy_rejected() {
        let model = GameModel::new(games::kuhn(2, 3).unwrap()).unwrap();
        let bad = vec![0.5; model.tfdps[1].d];
        let err = model
            .utility_gradient(0, &vec![vec![0.0; model.tfdps[0].d], bad])
            .unwrap_err();
        assert!(matches!(err, ModelError::InfeasibleStrategy { .. }));
    }
}
