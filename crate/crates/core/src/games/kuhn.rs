//! Multiplayer Kuhn poker.
//!
//! Every player antes 1 and receives one private card from a deck of
//! `deck` distinct cards. One betting round (bet size 1): players act in
//! seat order and may check or bet while nobody has bet; once a player
//! bets, every other player in cyclic order after the bettor responds
//! with call or fold. Showdown among the non-folded players (everyone if
//! nobody bet); the highest card takes the pot.

use crate::game_core::{ExtensiveFormGame, GameBuilder, NodeId};

use super::GamesError;

pub fn kuhn(players: usize, deck: usize) -> Result<ExtensiveFormGame, GamesError> {
    if players < 2 || deck < players {
        return Err(GamesError::KuhnParams { players, deck });
    }
    let mut b = GameBuilder::new(players);
    let deals = permutations(deck, players);
    let p = 1.0 / deals.len() as f64;
    let mut outcomes = Vec::with_capacity(deals.len());
    for deal in &deals {
        let node = betting(&mut b, players, deal, &mut Vec::new());
        outcomes.push((p, node));
    }
    let root = b.chance(outcomes);
    Ok(b.finish(root)?)
}

/// Ordered `take`-permutations of `0..n`.
fn permutations(n: usize, take: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; n];
    fn rec(
        n: usize,
        take: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == take {
            out.push(cur.clone());
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                cur.push(c);
                rec(n, take, used, cur, out);
                cur.pop();
                used[c] = false;
            }
        }
    }
    rec(n, take, &mut used, &mut cur, &mut out);
    out
}

fn betting(
    b: &mut GameBuilder,
    players: usize,
    deal: &[usize],
    hist: &mut Vec<char>,
) -> NodeId {
    let bet_at = hist.iter().position(|&c| c == 'b');
    let done = match bet_at {
        None => hist.len() == players,
        Some(i) => hist.len() == players + i,
    };
    if done {
        return terminal(b, players, deal, hist, bet_at);
    }
    // Seats act 0, 1, …; after a bet by seat i the responders continue
    // cyclically at i+1, so the actor is always hist.len() mod players.
    let to_act = hist.len() % players;
    let hist_str: String = hist.iter().collect();
    let label = format!("c{}|{}", deal[to_act], hist_str);
    let (acts, chars) = match bet_at {
        None => (["check", "bet"], ['k', 'b']),
        Some(_) => (["call", "fold"], ['c', 'f']),
    };
    let mut children = Vec::with_capacity(2);
    for &c in &chars {
        hist.push(c);
        children.push(betting(b, players, deal, hist));
        hist.pop();
    }
    let actions: Vec<String> = acts.iter().map(|s| s.to_string()).collect();
    b.player(to_act, label, &actions, children)
}

fn terminal(
    b: &mut GameBuilder,
    players: usize,
    deal: &[usize],
    hist: &[char],
    bet_at: Option<usize>,
) -> NodeId {
    let mut contrib = vec![1.0; players];
    let mut in_showdown = vec![true; players];
    if let Some(i) = bet_at {
        contrib[i] += 1.0;
        for (k, &c) in hist[i + 1..].iter().enumerate() {
            let responder = (i + 1 + k) % players;
            match c {
                'c' => contrib[responder] += 1.0,
                'f' => in_showdown[responder] = false,
                _ => unreachable!(),
            }
        }
    }
    let pot: f64 = contrib.iter().sum();
    let winner = (0..players)
        .filter(|&p| in_showdown[p])
        .max_by_key(|&p| deal[p])
        .expect("at least the bettor stays in");
    let utils: Vec<f64> = (0..players)
        .map(|p| if p == winner { pot - contrib[p] } else { -contrib[p] })
        .collect();
    b.terminal(utils)
}
