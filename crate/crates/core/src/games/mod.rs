//! Benchmark game generators and the JSON game format.
//!
//! Games are addressed by compact spec strings on the CLI:
//!
//! - `kuhn:P=4,D=5` — multiplayer Kuhn poker, `P` players, `D` cards;
//! - `leduc:P=3,R=3,S=2` — Leduc hold'em, `R` ranks with `S` suits each,
//!   one bet per round;
//! - `sheriff:N=10,B=2,R=2` — Sheriff of Nottingham bargaining game;
//! - `fig1` — built-in two-player guessing game ([`signal_guess`]);
//! - `fig3` — built-in early-query game ([`early_query`]);
//! - `file:<path>` — a game document in the JSON format of [`io`].

pub mod io;
mod kuhn;
mod leduc;
mod presets;
mod sheriff;

use std::path::PathBuf;

use thiserror::Error;

use crate::game_core::{ExtensiveFormGame, GameError};

pub use kuhn::kuhn;
pub use leduc::leduc;
pub use presets::{early_query, signal_guess};
pub use sheriff::sheriff;

#[derive(Debug, Error)]
pub enum GamesError {
    #[error("kuhn: players ({players}) must be at least 2 and at most the deck size ({deck})")]
    KuhnParams { players: usize, deck: usize },
    #[error(
        "leduc: need players + 1 <= ranks*suits cards and players >= 2 \
         (got players={players}, ranks={ranks}, suits={suits})"
    )]
    LeducParams {
        players: usize,
        ranks: usize,
        suits: usize,
    },
    #[error("sheriff: rounds must be at least 1 (got {rounds})")]
    SheriffParams { rounds: usize },
    #[error("unknown game spec {spec:?} (expected kuhn:…, leduc:…, sheriff:…, fig1, fig3, file:…)")]
    UnknownSpec { spec: String },
    #[error("game spec {spec:?}: bad or missing parameter {param:?}")]
    BadParam { spec: String, param: String },
    #[error("failed to read game file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse game document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A parsed game spec string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSpec {
    Kuhn { players: usize, deck: usize },
    Leduc { players: usize, ranks: usize, suits: usize },
    Sheriff { items: usize, max_bribe: usize, rounds: usize },
    Fig1,
    Fig3,
    File(PathBuf),
}

impl GameSpec {
    pub fn parse(spec: &str) -> Result<GameSpec, GamesError> {
        match spec {
            "fig1" => return Ok(GameSpec::Fig1),
            "fig3" => return Ok(GameSpec::Fig3),
            _ => {}
        }
        let (head, rest) = match spec.split_once(':') {
            Some(x) => x,
            None => {
                return Err(GamesError::UnknownSpec {
                    spec: spec.to_string(),
                })
            }
        };
        if head == "file" {
            return Ok(GameSpec::File(PathBuf::from(rest)));
        }
        let get = |key: &str| -> Result<usize, GamesError> {
            for kv in rest.split(',') {
                if let Some((k, v)) = kv.split_once('=') {
                    if k == key {
                        return v.parse().map_err(|_| GamesError::BadParam {
                            spec: spec.to_string(),
                            param: key.to_string(),
                        });
                    }
                }
            }
            Err(GamesError::BadParam {
                spec: spec.to_string(),
                param: key.to_string(),
            })
        };
        match head {
            "kuhn" => Ok(GameSpec::Kuhn {
                players: get("P")?,
                deck: get("D")?,
            }),
            "leduc" => Ok(GameSpec::Leduc {
                players: get("P")?,
                ranks: get("R")?,
                suits: get("S")?,
            }),
            "sheriff" => Ok(GameSpec::Sheriff {
                items: get("N")?,
                max_bribe: get("B")?,
                rounds: get("R")?,
            }),
            _ => Err(GamesError::UnknownSpec {
                spec: spec.to_string(),
            }),
        }
    }

    pub fn build(&self) -> Result<ExtensiveFormGame, GamesError> {
        match self {
            GameSpec::Kuhn { players, deck } => kuhn(*players, *deck),
            GameSpec::Leduc {
                players,
                ranks,
                suits,
            } => leduc(*players, *ranks, *suits),
            GameSpec::Sheriff {
                items,
                max_bribe,
                rounds,
            } => sheriff(*items, *max_bribe, *rounds),
            GameSpec::Fig1 => Ok(signal_guess()),
            GameSpec::Fig3 => Ok(early_query()),
            GameSpec::File(path) => io::load_game_file(path),
        }
    }
}

impl std::fmt::Display for GameSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GameSpec::Kuhn { players, deck } => write!(f, "kuhn:P={players},D={deck}"),
            GameSpec::Leduc {
                players,
                ranks,
                suits,
            } => write!(f, "leduc:P={players},R={ranks},S={suits}"),
            GameSpec::Sheriff {
                items,
                max_bribe,
                rounds,
            } => write!(f, "sheriff:N={items},B={max_bribe},R={rounds}"),
            GameSpec::Fig1 => write!(f, "fig1"),
            GameSpec::Fig3 => write!(f, "fig3"),
            GameSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}
