//! Learning linear correlated equilibria in extensive-form games.
//!
//! A linear correlated equilibrium is a correlated profile that is stable
//! against every *linear* transformation of a player's sequence-form
//! strategy polytope. This crate minimizes linear-swap regret by working
//! with the equivalent set of *untimed-communication (UTC) deviations*:
//! strategies in a DAG-shaped decision problem in which the deviator
//! interleaves game actions with any number of queries to a mediator that
//! answers with action recommendations from a sampled pure strategy.
//!
//! The pipeline is:
//!
//! 1. [`game_core`] — extensive-form game trees, per-player tree-form
//!    decision problems, sequence-form strategies, utility gradients.
//! 2. [`games`] — benchmark game generators (Kuhn, Leduc, Sheriff), two
//!    built-in demonstration games, and a JSON game format.
//! 3. [`utc`] — the UTC deviation DAG, the `(A, B)` sequence-form matrix
//!    representation of deviations with its flow constraint system, and
//!    the row-canonicalization / matrix-completion constructions.
//! 4. [`learning`] — regret matching(+) local learners, counterfactual
//!    regret minimization over the deviation DAG, fixed points of linear
//!    deviations, and the self-play loop that ties them together.
//! 5. [`evaluation`] — aggregation of the empirical profile of play and
//!    equilibrium-gap measurement by best-response dynamic programming
//!    over the DAG.
//! 6. [`cli`] — the batch experiment harness behind the `utc-eq` binary.

pub mod cli;
pub mod evaluation;
pub mod game_core;
pub mod games;
pub mod learning;
pub mod utc;

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
