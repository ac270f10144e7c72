//! Extensive-form game trees.
//!
//! Games are stored as an arena of nodes. Player nodes are grouped into
//! information sets keyed by `(player, label)`; all nodes of an infoset
//! must offer the same actions, and under perfect recall they must agree
//! on the owning player's full history of `(infoset, action)` pairs.

use std::collections::HashMap;

use thiserror::Error;

pub type PlayerId = usize;
pub type NodeId = usize;
pub type InfosetId = usize;

/// A node of the game tree.
#[derive(Debug, Clone)]
pub enum GameNode {
    /// Chance node: outcomes with probabilities that sum to one.
    Chance { outcomes: Vec<(f64, NodeId)> },
    /// Decision node owned by `player`; one child per action of `infoset`.
    Player {
        player: PlayerId,
        infoset: InfosetId,
        children: Vec<NodeId>,
    },
    /// Leaf with one utility per player.
    Terminal { utils: Vec<f64> },
}

/// An information set: the nodes a player cannot tell apart.
#[derive(Debug, Clone)]
pub struct Infoset {
    pub player: PlayerId,
    pub label: String,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct ExtensiveFormGame {
    num_players: usize,
    nodes: Vec<GameNode>,
    root: NodeId,
    infosets: Vec<Infoset>,
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("chance node {node}: outcome probabilities sum to {sum}, expected 1")]
    ChanceProbSum { node: NodeId, sum: f64 },
    #[error("chance node {node}: negative outcome probability {p}")]
    NegativeChanceProb { node: NodeId, p: f64 },
    #[error("chance node {node} has no outcomes")]
    EmptyChance { node: NodeId },
    #[error("terminal node {node}: {got} utilities for a {expected}-player game")]
    UtilityArity {
        node: NodeId,
        got: usize,
        expected: usize,
    },
    #[error("player {player} out of range (game has {num_players} players)")]
    PlayerOutOfRange {
        player: PlayerId,
        num_players: usize,
    },
    #[error("infoset {label:?}: node has {got} children, infoset has {expected} actions")]
    ActionArityMismatch {
        label: String,
        got: usize,
        expected: usize,
    },
    #[error(
        "perfect recall violated at infoset {label:?}: \
         one node has own-history [{a}], another [{b}]"
    )]
    RecallViolation { label: String, a: String, b: String },
}

/// Incrementally builds a game arena. Children are created before parents.
pub struct GameBuilder {
    num_players: usize,
    nodes: Vec<GameNode>,
    infosets: Vec<Infoset>,
    by_key: HashMap<(PlayerId, String), InfosetId>,
}

impl GameBuilder {
    pub fn new(num_players: usize) -> Self {
        GameBuilder {
            num_players,
            nodes: Vec::new(),
            infosets: Vec::new(),
            by_key: HashMap::new(),
        }
    }

    pub fn terminal(&mut self, utils: Vec<f64>) -> NodeId {
        self.push(GameNode::Terminal { utils })
    }

    pub fn chance(&mut self, outcomes: Vec<(f64, NodeId)>) -> NodeId {
        self.push(GameNode::Chance { outcomes })
    }

    /// Adds a decision node for `player`, registering the infoset on first use.
    pub fn player(
        &mut self,
        player: PlayerId,
        label: impl Into<String>,
        actions: &[String],
        children: Vec<NodeId>,
    ) -> NodeId {
        let label = label.into();
        let infoset = match self.by_key.get(&(player, label.clone())) {
            Some(&id) => id,
            None => {
                let id = self.infosets.len();
                self.infosets.push(Infoset {
                    player,
                    label: label.clone(),
                    actions: actions.to_vec(),
                    nodes: Vec::new(),
                });
                self.by_key.insert((player, label), id);
                id
            }
        };
        let node = self.push(GameNode::Player {
            player,
            infoset,
            children,
        });
        self.infosets[infoset].nodes.push(node);
        node
    }

    fn push(&mut self, node: GameNode) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Finishes the game and validates structure and perfect recall.
    pub fn finish(self, root: NodeId) -> Result<ExtensiveFormGame, GameError> {
        let game = self.finish_unchecked(root);
        game.validate_structure()?;
        validate_perfect_recall(&game)?;
        Ok(game)
    }

    /// Finishes without validation. Intended for tests that need to
    /// construct deliberately malformed games.
    pub fn finish_unchecked(self, root: NodeId) -> ExtensiveFormGame {
        ExtensiveFormGame {
            num_players: self.num_players,
            nodes: self.nodes,
            root,
            infosets: self.infosets,
        }
    }
}

impl ExtensiveFormGame {
    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &GameNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[GameNode] {
        &self.nodes
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id]
    }

    pub fn terminal_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, GameNode::Terminal { .. }))
            .count()
    }

    /// `(min, max)` over all terminal utilities of all players.
    pub fn utility_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for n in &self.nodes {
            if let GameNode::Terminal { utils } = n {
                for &u in utils {
                    lo = lo.min(u);
                    hi = hi.max(u);
                }
            }
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Returns a copy with every utility affinely rescaled into `[0, 1]`.
    pub fn normalized(&self) -> ExtensiveFormGame {
        let (lo, hi) = self.utility_range();
        let span = hi - lo;
        let mut out = self.clone();
        for n in &mut out.nodes {
            if let GameNode::Terminal { utils } = n {
                for u in utils.iter_mut() {
                    *u = if span > 0.0 { (*u - lo) / span } else { 0.0 };
                }
            }
        }
        out
    }

    /// Structural validation: probability mass, utility arity, player range,
    /// infoset action arity. Reported separately from recall violations.
    pub fn validate_structure(&self) -> Result<(), GameError> {
        for (id, n) in self.nodes.iter().enumerate() {
            match n {
                GameNode::Chance { outcomes } => {
                    if outcomes.is_empty() {
                        return Err(GameError::EmptyChance { node: id });
                    }
                    let mut sum = 0.0;
                    for &(p, _) in outcomes {
                        if p < 0.0 {
                            return Err(GameError::NegativeChanceProb { node: id, p });
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(GameError::ChanceProbSum { node: id, sum });
                    }
                }
                GameNode::Player {
                    player,
                    infoset,
                    children,
                } => {
                    if *player >= self.num_players {
                        return Err(GameError::PlayerOutOfRange {
                            player: *player,
                            num_players: self.num_players,
                        });
                    }
                    let is = &self.infosets[*infoset];
                    if children.len() != is.actions.len() {
                        return Err(GameError::ActionArityMismatch {
                            label: is.label.clone(),
                            got: children.len(),
                            expected: is.actions.len(),
                        });
                    }
                }
                GameNode::Terminal { utils } => {
                    if utils.len() != self.num_players {
                        return Err(GameError::UtilityArity {
                            node: id,
                            got: utils.len(),
                            expected: self.num_players,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks that every infoset's nodes agree on the owner's root-path history
/// of `(infoset, action)` pairs. Returns the first offending infoset.
pub fn validate_perfect_recall(game: &ExtensiveFormGame) -> Result<(), GameError> {
    // First seen own-history per infoset.
    let mut seen: Vec<Option<Vec<(InfosetId, usize)>>> = vec![None; game.infosets().len()];
    let mut hist: Vec<Vec<(InfosetId, usize)>> = vec![Vec::new(); game.num_players()];

    fn rec(
        game: &ExtensiveFormGame,
        node: NodeId,
        hist: &mut Vec<Vec<(InfosetId, usize)>>,
        seen: &mut [Option<Vec<(InfosetId, usize)>>],
    ) -> Result<(), GameError> {
        match game.node(node) {
            GameNode::Terminal { .. } => Ok(()),
            GameNode::Chance { outcomes } => {
                for &(_, child) in outcomes {
                    rec(game, child, hist, seen)?;
                }
                Ok(())
            }
            GameNode::Player {
                player,
                infoset,
                children,
            } => {
                match &seen[*infoset] {
                    None => seen[*infoset] = Some(hist[*player].clone()),
                    Some(first) => {
                        if first != &hist[*player] {
                            let is = game.infoset(*infoset);
                            return Err(GameError::RecallViolation {
                                label: is.label.clone(),
                                a: fmt_hist(game, first),
                                b: fmt_hist(game, &hist[*player]),
                            });
                        }
                    }
                }
                for (a, &child) in children.iter().enumerate() {
                    hist[*player].push((*infoset, a));
                    rec(game, child, hist, seen)?;
                    hist[*player].pop();
                }
                Ok(())
            }
        }
    }

    rec(game, game.root(), &mut hist, &mut seen)
}

fn fmt_hist(game: &ExtensiveFormGame, h: &[(InfosetId, usize)]) -> String {
    h.iter()
        .map(|&(is, a)| {
            let info = game.infoset(is);
            format!("{}:{}", info.label, info.actions[a])
        })
        .collect::<Vec<_>>()
        .join(" ")
}
