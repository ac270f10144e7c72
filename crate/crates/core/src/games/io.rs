//! JSON game documents.
//!
//! ```json
//! {
//!   "players": 2,
//!   "root": {
//!     "type": "chance",
//!     "outcomes": [
//!       { "p": 0.5, "node": { "type": "player", "player": 0, "infoset": "X",
//!                              "actions": [ { "label": "l", "node": … } ] } },
//!       { "p": 0.5, "node": { "type": "terminal", "utils": [1.0, -1.0] } }
//!     ]
//!   }
//! }
//! ```
//!
//! Loading validates chance probabilities and perfect recall. Saving a
//! loaded game reproduces the canonical serialization byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::game_core::{ExtensiveFormGame, GameBuilder, GameNode, NodeId};

use super::GamesError;

#[derive(Debug, Serialize, Deserialize)]
struct GameDoc {
    players: usize,
    root: NodeDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum NodeDoc {
    Chance {
        outcomes: Vec<OutcomeDoc>,
    },
    Player {
        player: usize,
        infoset: String,
        actions: Vec<ActionDoc>,
    },
    Terminal {
        utils: Vec<f64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct OutcomeDoc {
    p: f64,
    node: NodeDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct ActionDoc {
    label: String,
    node: NodeDoc,
}

pub fn load_game_str(s: &str) -> Result<ExtensiveFormGame, GamesError> {
    let doc: GameDoc = serde_json::from_str(s)?;
    let mut b = GameBuilder::new(doc.players);
    let root = build_node(&mut b, &doc.root);
    Ok(b.finish(root)?)
}

pub fn load_game_file(path: &Path) -> Result<ExtensiveFormGame, GamesError> {
    load_game_str(&std::fs::read_to_string(path)?)
}

fn build_node(b: &mut GameBuilder, doc: &NodeDoc) -> NodeId {
    match doc {
        NodeDoc::Terminal { utils } => b.terminal(utils.clone()),
        NodeDoc::Chance { outcomes } => {
            let children: Vec<(f64, NodeId)> = outcomes
                .iter()
                .map(|o| (o.p, build_node(b, &o.node)))
                .collect();
            b.chance(children)
        }
        NodeDoc::Player {
            player,
            infoset,
            actions,
        } => {
            let children: Vec<NodeId> = actions.iter().map(|a| build_node(b, &a.node)).collect();
            let labels: Vec<String> = actions.iter().map(|a| a.label.clone()).collect();
            b.player(*player, infoset.clone(), &labels, children)
        }
    }
}

pub fn save_game_string(game: &ExtensiveFormGame) -> String {
    let doc = GameDoc {
        players: game.num_players(),
        root: node_doc(game, game.root()),
    };
    serde_json::to_string_pretty(&doc).expect("game serialization cannot fail")
}

pub fn save_game_file(game: &ExtensiveFormGame, path: &Path) -> Result<(), GamesError> {
    Ok(std::fs::write(path, save_game_string(game))?)
}

fn node_doc(game: &ExtensiveFormGame, id: NodeId) -> NodeDoc {
    match game.node(id) {
        GameNode::Terminal { utils } => NodeDoc::Terminal {
            utils: utils.clone(),
        },
        GameNode::Chance { outcomes } => NodeDoc::Chance {
            outcomes: outcomes
                .iter()
                .map(|&(p, child)| OutcomeDoc {
                    p,
                    node: node_doc(game, child),
                })
                .collect(),
        },
        GameNode::Player {
            infoset, children, ..
        } => {
            let info = game.infoset(*infoset);
            NodeDoc::Player {
                player: info.player,
                infoset: info.label.clone(),
                actions: info
                    .actions
                    .iter()
                    .zip(children)
                    .map(|(label, &child)| ActionDoc {
                        label: label.clone(),
                        node: node_doc(game, child),
                    })
                    .collect(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;

    #[test]
    fn round_trip_is_canonical() {
        for g in [games::signal_guess(), games::kuhn(2, 3).unwrap()] {
            let s1 = save_game_string(&g);
            let g2 = load_game_str(&s1).unwrap();
            let s2 = save_game_string(&g2);
            assert_eq!(s1, s2);
            assert_eq!(g.terminal_count(), g2.terminal_count());
        }
    }

    #[test]
    fn loader_rejects_bad_probabilities() {
        let s = r#"{"players":1,"root":{"type":"chance","outcomes":[
            {"p":0.7,"node":{"type":"terminal","utils":[0.0]}},
            {"p":0.7,"node":{"type":"terminal","utils":[0.0]}}]}}"#;
        assert!(load_game_str(s).is_err());
    }
}
