//! Untimed-communication (UTC) deviations.
//!
//! A UTC deviator plays a copy of the real decision problem while holding
//! a conversation with a mediator that knows a pure strategy of a second
//! ("mediator") decision problem. States are pairs: the real state and
//! the mediator state. At a decision point the deviator either plays a
//! real action or queries any next mediator decision point; queries are
//! answered with the mediator strategy's recommended action. Because the
//! two components can be advanced in any interleaving, the state space is
//! a DAG rather than a tree.
//!
//! Mixed deviator strategies have a sequence form: a pair of matrices
//! `(A, B)` of state masses, `A` over pairs of sequences and `B` over
//! pairs of decision points, subject to one flow-conservation equation
//! per decision state plus root and nonnegativity conditions. The induced
//! strategy transformation is `x -> A x`, so these deviations are exactly
//! the linear maps of the sequence-form polytope into itself.

mod canonical;
mod dag;
mod deviation;

pub use canonical::{canonicalize_rows, complete_matrix};
pub use dag::{DagStats, EdgeLabel, NodeId, NodeKind, UtcDag, UtcEdge, UtcNode};
pub use deviation::{
    apply_deviation, behavioral_to_sequence, check_constraints, count_pure_deviations,
    enumerate_pure_deviations, export_deviation_json, for_each_pure_deviation,
    BehavioralUtcStrategy, ConstraintId, ConstraintReport, PureDeviation, UtcDeviation, UtcError,
};
