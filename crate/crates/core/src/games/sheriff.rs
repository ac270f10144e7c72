//! Sheriff of Nottingham bargaining game.
//!
//! The smuggler secretly loads `0..=items` illegal items, then the two
//! players bargain: `rounds` non-binding exchanges followed by one binding
//! exchange. In each exchange the smuggler proposes a bribe in
//! `0..=max_bribe` and the sheriff answers accept or decline; only the
//! binding exchange settles the game. A binding accept lets the cart
//! through in return for the bribe; a binding decline means the sheriff
//! inspects the cart, fining the smuggler per illegal item found or
//! compensating an honest smuggler.

use crate::game_core::{ExtensiveFormGame, GameBuilder, NodeId};

use super::GamesError;

/// Smuggler's value per illegal item that makes it through.
const ITEM_VALUE: f64 = 5.0;
/// Fine per illegal item found on inspection (paid to the sheriff).
const FINE_PER_ITEM: f64 = 1.0;
/// Compensation owed to an honest smuggler after a fruitless inspection.
const COMPENSATION: f64 = 3.0;

const SMUGGLER: usize = 0;
const SHERIFF: usize = 1;

pub fn sheriff(
    items: usize,
    max_bribe: usize,
    rounds: usize,
) -> Result<ExtensiveFormGame, GamesError> {
    if rounds < 1 {
        return Err(GamesError::SheriffParams { rounds });
    }
    let mut b = GameBuilder::new(2);
    let load_actions: Vec<String> = (0..=items).map(|n| format!("n={n}")).collect();
    let mut children = Vec::with_capacity(items + 1);
    for n in 0..=items {
        children.push(exchange(&mut b, max_bribe, rounds, n, 0, String::new()));
    }
    let root = b.player(SMUGGLER, "load", &load_actions, children);
    Ok(b.finish(root)?)
}

/// One proposal/response exchange; exchange index `rounds` is binding.
fn exchange(
    b: &mut GameBuilder,
    max_bribe: usize,
    rounds: usize,
    n: usize,
    ex: usize,
    hist: String,
) -> NodeId {
    let binding = ex == rounds;
    let bribe_actions: Vec<String> = (0..=max_bribe).map(|v| format!("b={v}")).collect();
    let respond_actions = vec!["accept".to_string(), "decline".to_string()];
    let mut bribe_children = Vec::with_capacity(max_bribe + 1);
    for bribe in 0..=max_bribe {
        let hist_b = format!("{hist}b{bribe}");
        let accept = if binding {
            let value = ITEM_VALUE * n as f64 - bribe as f64;
            b.terminal(vec![value, bribe as f64])
        } else {
            exchange(b, max_bribe, rounds, n, ex + 1, format!("{hist_b}a"))
        };
        let decline = if binding {
            if n > 0 {
                let fine = FINE_PER_ITEM * n as f64;
                b.terminal(vec![-fine, fine])
            } else {
                b.terminal(vec![COMPENSATION, -COMPENSATION])
            }
        } else {
            exchange(b, max_bribe, rounds, n, ex + 1, format!("{hist_b}d"))
        };
        bribe_children.push(b.player(
            SHERIFF,
            format!("sheriff|{hist_b}"),
            &respond_actions,
            vec![accept, decline],
        ));
    }
    b.player(
        SMUGGLER,
        format!("smuggler|n={n}|{hist}"),
        &bribe_actions,
        bribe_children,
    )
}
