//! Two small built-in games, exposed on the CLI as `fig1` and `fig3`.
//!
//! Both are designed so that correlated play looks stable against timed
//! mediator interactions but is exploitable by a deviator that may query
//! the mediator an arbitrary number of times per decision point.

use crate::game_core::{ExtensiveFormGame, GameBuilder};

fn acts(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `fig1`: a guessing game where the information needed to guess lives in
/// recommendations at decision points the deviator has already bypassed.
///
/// Chance picks uniformly among three branches. Branches one and two are
/// single decisions A and B of player 1 with all-zero payoffs. In branch
/// three, player 1 may quit at C (payoff 0) or enter (action `c2`) a pair
/// of guessing subgames D and E (chosen by chance uniformly), where it
/// must match player 2's action at F resp. G: +1 for a correct guess and
/// -10 otherwise. Player 2's utility is zero everywhere.
pub fn signal_guess() -> ExtensiveFormGame {
    let mut b = GameBuilder::new(2);

    let guess = |b: &mut GameBuilder, own: &str, opp: &str, own_acts: [&str; 2], opp_acts: [&str; 2]| {
        // Player 1 guesses player 2's action: match pays +1, mismatch -10.
        let mut p1_children = Vec::new();
        for i in 0..2 {
            let mut p2_children = Vec::new();
            for j in 0..2 {
                let u = if i == j { 1.0 } else { -10.0 };
                p2_children.push(b.terminal(vec![u, 0.0]));
            }
            p1_children.push(b.player(1, opp, &acts(&opp_acts), p2_children));
        }
        b.player(0, own, &acts(&own_acts), p1_children)
    };

    // Branch A.
    let ta1 = b.terminal(vec![0.0, 0.0]);
    let ta2 = b.terminal(vec![0.0, 0.0]);
    let branch_a = b.player(0, "A", &acts(&["a1", "a2"]), vec![ta1, ta2]);
    // Branch B.
    let tb1 = b.terminal(vec![0.0, 0.0]);
    let tb2 = b.terminal(vec![0.0, 0.0]);
    let branch_b = b.player(0, "B", &acts(&["b1", "b2"]), vec![tb1, tb2]);
    // Branch C: quit, or enter the guessing subgames.
    let tc1 = b.terminal(vec![0.0, 0.0]);
    let d = guess(&mut b, "D", "F", ["d1", "d2"], ["f1", "f2"]);
    let e = guess(&mut b, "E", "G", ["e1", "e2"], ["g1", "g2"]);
    let de = b.chance(vec![(0.5, d), (0.5, e)]);
    let branch_c = b.player(0, "C", &acts(&["c1", "c2"]), vec![tc1, de]);

    let third = 1.0 / 3.0;
    let root = b.chance(vec![(third, branch_a), (third, branch_b), (third, branch_c)]);
    b.finish(root).expect("built-in game is valid")
}

/// `fig3`: a game where profiting requires querying a *later* decision
/// point before acting, and even more than one query per decision.
///
/// Player 1 moves at the root A with three actions. Action `a1` leads to a
/// second decision B whose subgame pays zero regardless. Actions `a2`/`a3`
/// are bets on player 2's action at C: `a2` pays +1 against `c1` and -1
/// against `c2`, and `a3` the reverse. Player 2's single infoset C spans
/// all four of its nodes; its utility is zero everywhere.
pub fn early_query() -> ExtensiveFormGame {
    let mut b = GameBuilder::new(2);
    let c_acts = acts(&["c1", "c2"]);

    let p2 = |b: &mut GameBuilder, u1: [f64; 2]| {
        let t1 = b.terminal(vec![u1[0], 0.0]);
        let t2 = b.terminal(vec![u1[1], 0.0]);
        b.player(1, "C", &c_acts, vec![t1, t2])
    };

    let b_left = p2(&mut b, [0.0, 0.0]);
    let b_right = p2(&mut b, [0.0, 0.0]);
    let node_b = b.player(0, "B", &acts(&["b1", "b2"]), vec![b_left, b_right]);
    let node_a2 = p2(&mut b, [1.0, -1.0]);
    let node_a3 = p2(&mut b, [-1.0, 1.0]);
    let root = b.player(0, "A", &acts(&["a1", "a2", "a3"]), vec![node_b, node_a2, node_a3]);
    b.finish(root).expect("built-in game is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{GameModel, GameNode};

    #[test]
    fn signal_guess_player2_utility_zero_everywhere() {
        let g = signal_guess();
        for n in g.nodes() {
            if let GameNode::Terminal { utils } = n {
                assert_eq!(utils[1], 0.0);
            }
        }
    }

    #[test]
    fn signal_guess_payoff_zero_when_quitting() {
        // Pure profile (a1, b1, c1, f1, g1): the only reachable payoffs are 0.
        let model = GameModel::new(signal_guess()).unwrap();
        let x1 = pure(&model, 0, &["A:a1", "B:b1", "C:c1"]);
        let x2 = pure(&model, 1, &["F:f1", "G:g1"]);
        let u = model.expected_utility(&vec![x1, x2]).unwrap();
        assert_eq!(u, vec![0.0, 0.0]);
    }

    #[test]
    fn early_query_payoffs() {
        let model = GameModel::new(early_query()).unwrap();
        // (a1, b1, c1) pays zero.
        let x1 = pure(&model, 0, &["A:a1", "B:b1"]);
        let x2 = pure(&model, 1, &["C:c1"]);
        assert_eq!(model.expected_utility(&vec![x1, x2.clone()]).unwrap()[0], 0.0);
        // (a2, c1) pays +1.
        let y1 = pure(&model, 0, &["A:a2"]);
        assert_eq!(model.expected_utility(&vec![y1, x2]).unwrap()[0], 1.0);
    }

    pub(crate) fn pure(model: &GameModel, player: usize, chosen: &[&str]) -> Vec<f64> {
        let t = &model.tfdps[player];
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
}
