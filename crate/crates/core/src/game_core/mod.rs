//! Extensive-form games, tree-form decision problems, and sequence-form
//! strategy machinery.

mod game;
mod model;
mod tfdp;

pub use game::{
    validate_perfect_recall, ExtensiveFormGame, GameBuilder, GameError, GameNode, Infoset,
    InfosetId, NodeId, PlayerId,
};
pub use model::{GameModel, ModelError, TerminalRecord};
pub use tfdp::{DecisionPoint, Tfdp, TfdpError, DEFAULT_ENUMERATION_BOUND};

/// Tolerance below which a constructed object is considered exact.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance used when verifying invariants of computed objects.
pub const VERIFICATION_TOL: f64 = 1e-9;
/// Tolerance used when accepting externally supplied inputs.
pub const INPUT_TOL: f64 = 1e-6;
