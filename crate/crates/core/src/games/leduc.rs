//! Leduc hold'em with a configurable deck of `ranks` ranks and `suits`
//! copies of each rank.
//!
//! Every player antes 1 and receives a private card; suits carry no
//! information, so chance deals rank vectors weighted by the number of
//! card assignments realizing them. One bet of size 2 is allowed in the
//! first betting round. If more than one player remains, a community rank
//! is revealed and a second round with bet size 4 follows. At showdown a
//! player pairing the community card wins; otherwise the highest private
//! rank wins, with exact pot splitting on ties. A round's betting works
//! like Kuhn: check/bet until someone bets, then call/fold responses.

use crate::game_core::{ExtensiveFormGame, GameBuilder, NodeId};

use super::GamesError;

const BET_SIZES: [f64; 2] = [2.0, 4.0];

pub fn leduc(players: usize, ranks: usize, suits: usize) -> Result<ExtensiveFormGame, GamesError> {
    if players < 2 || players + 1 > ranks * suits {
        return Err(GamesError::LeducParams {
            players,
            ranks,
            suits,
        });
    }
    let mut b = GameBuilder::new(players);
    let mut outcomes = Vec::new();
    let total_cards = ranks * suits;
    let mut deal = Vec::with_capacity(players);
    let mut held = vec![0usize; ranks];
    deal_rec(
        &mut b,
        &mut Ctx {
            players,
            ranks,
            suits,
            total_cards,
        },
        &mut deal,
        &mut held,
        1.0,
        &mut outcomes,
    );
    let root = b.chance(outcomes);
    Ok(b.finish(root)?)
}

struct Ctx {
    players: usize,
    ranks: usize,
    suits: usize,
    total_cards: usize,
}

fn deal_rec(
    b: &mut GameBuilder,
    ctx: &mut Ctx,
    deal: &mut Vec<usize>,
    held: &mut Vec<usize>,
    prob: f64,
    outcomes: &mut Vec<(f64, NodeId)>,
) {
    if deal.len() == ctx.players {
        let mut st = RoundState {
            round: 0,
            community: None,
            active: vec![true; ctx.players],
            contrib: vec![1.0; ctx.players],
            hist: String::new(),
            queue: Vec::new(),
            pos: 0,
            bettor: None,
        };
        st.start_round(ctx.players);
        let node = betting(b, ctx, deal, held, st);
        outcomes.push((prob, node));
        return;
    }
    let remaining_total = (ctx.total_cards - deal.len()) as f64;
    for r in 0..ctx.ranks {
        let avail = ctx.suits - held[r];
        if avail == 0 {
            continue;
        }
        deal.push(r);
        held[r] += 1;
        deal_rec(
            b,
            ctx,
            deal,
            held,
            prob * avail as f64 / remaining_total,
            outcomes,
        );
        held[r] -= 1;
        deal.pop();
    }
}

#[derive(Clone)]
struct RoundState {
    round: usize,
    community: Option<usize>,
    active: Vec<bool>,
    contrib: Vec<f64>,
    /// Public history: action chars, with `/r<rank>` marking the reveal.
    hist: String,
    /// Remaining actors of the current betting round, in order. Fixed when
    /// the round starts and rebuilt when a bet occurs, so that a fold does
    /// not skip later responders.
    queue: Vec<usize>,
    pos: usize,
    bettor: Option<usize>,
}

impl RoundState {
    fn start_round(&mut self, players: usize) {
        self.queue = (0..players).filter(|&p| self.active[p]).collect();
        self.pos = 0;
        self.bettor = None;
    }

    fn on_bet(&mut self, players: usize, bettor: usize) {
        self.queue = (1..players)
            .map(|k| (bettor + k) % players)
            .filter(|&p| self.active[p])
            .collect();
        self.pos = 0;
        self.bettor = Some(bettor);
    }
}

fn betting(
    b: &mut GameBuilder,
    ctx: &mut Ctx,
    deal: &[usize],
    held: &mut Vec<usize>,
    st: RoundState,
) -> NodeId {
    if st.pos >= st.queue.len() {
        return round_over(b, ctx, deal, held, st);
    }
    let p = st.queue[st.pos];
    let label = format!("c{}|{}", deal[p], st.hist);
    let (acts, chars): (&[&str], &[char]) = match st.bettor {
        None => (&["check", "bet"], &['k', 'b']),
        Some(_) => (&["call", "fold"], &['c', 'f']),
    };
    let mut children = Vec::with_capacity(2);
    for &c in chars {
        let mut next = st.clone();
        next.hist.push(c);
        match c {
            'k' => next.pos += 1,
            'b' => {
                next.contrib[p] += BET_SIZES[st.round];
                next.on_bet(ctx.players, p);
            }
            'c' => {
                next.contrib[p] += BET_SIZES[st.round];
                next.pos += 1;
            }
            'f' => {
                next.active[p] = false;
                next.pos += 1;
            }
            _ => unreachable!(),
        }
        children.push(betting(b, ctx, deal, held, next));
    }
    let actions: Vec<String> = acts.iter().map(|s| s.to_string()).collect();
    b.player(p, label, &actions, children)
}

fn round_over(
    b: &mut GameBuilder,
    ctx: &mut Ctx,
    deal: &[usize],
    held: &mut Vec<usize>,
    st: RoundState,
) -> NodeId {
    let survivors: Vec<usize> = (0..ctx.players).filter(|&p| st.active[p]).collect();
    if survivors.len() == 1 || st.round == 1 {
        return showdown(b, ctx, deal, &st, &survivors);
    }
    // Reveal the community rank from the remaining cards.
    let remaining_total = (ctx.total_cards - ctx.players) as f64;
    let mut outcomes = Vec::new();
    for r in 0..ctx.ranks {
        let avail = ctx.suits - held[r];
        if avail == 0 {
            continue;
        }
        let mut next = st.clone();
        next.round = 1;
        next.community = Some(r);
        next.hist.push_str(&format!("/r{r}/"));
        next.start_round(ctx.players);
        held[r] += 1;
        let node = betting(b, ctx, deal, held, next);
        held[r] -= 1;
        outcomes.push((avail as f64 / remaining_total, node));
    }
    b.chance(outcomes)
}

fn showdown(
    b: &mut GameBuilder,
    _ctx: &Ctx,
    deal: &[usize],
    st: &RoundState,
    survivors: &[usize],
) -> NodeId {
    let pot: f64 = st.contrib.iter().sum();
    let winners: Vec<usize> = if survivors.len() == 1 {
        survivors.to_vec()
    } else {
        let paired: Vec<usize> = survivors
            .iter()
            .copied()
            .filter(|&p| Some(deal[p]) == st.community)
            .collect();
        if !paired.is_empty() {
            paired
        } else {
            let best = survivors.iter().map(|&p| deal[p]).max().unwrap();
            survivors
                .iter()
                .copied()
                .filter(|&p| deal[p] == best)
                .collect()
        }
    };
    // Split the pot with exact compensation so leaves stay zero-sum.
    let share = pot / winners.len() as f64;
    let mut utils: Vec<f64> = st.contrib.iter().map(|&c| -c).collect();
    let mut paid = 0.0;
    for (k, &w) in winners.iter().enumerate() {
        let s = if k + 1 == winners.len() {
            pot - paid
        } else {
            paid += share;
            share
        };
        utils[w] += s;
    }
    b.terminal(utils)
}
