//! Regret minimization over the UTC deviation polytope and the self-play
//! loop that learns linear correlated equilibria.
//!
//! The reduction works per player: an external regret minimizer over the
//! deviation polytope recommends a linear map each iteration; the player
//! plays a fixed point of that map; the realized utility gradient is
//! lifted to a linear utility on deviations (`G_A = g x^T`) and fed back.
//! External regret over deviations then bounds linear-swap regret.

mod cfr;
mod dynamics;
mod fixed_point;
mod regret;

pub use cfr::{CfrState, DeviationGradient, LearnError};
pub use dynamics::{
    run_dynamics, Algo, DynConfig, DynError, LogRow, RunOutcome, RunSummary, Terminated,
};
pub use fixed_point::{
    cesaro_fixed_point, fixed_point, fixed_point_from, FixedPoint, FixedPointError, FpMethod,
};
pub use regret::{LocalRegretMinimizer, RmKind};
