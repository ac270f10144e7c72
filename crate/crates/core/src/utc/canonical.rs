//! Canonical row representation and matrix completion.
//!
//! Every linear functional that is nonnegative on all pure strategies of
//! a decision problem has a unique coefficient vector that (1) represents
//! the same functional, (2) is entrywise nonnegative, and (3) has a zero
//! coefficient on at least one action of every decision point. It is
//! reached by a bottom-up sweep that subtracts each decision point's
//! minimum action coefficient and adds it onto the parent sequence, which
//! leaves `<c, x>` unchanged by flow conservation.
//!
//! Given an `A` matrix whose rows are canonical and which maps the
//! mediator polytope into the real polytope, a valid `B` completing the
//! constraint system is recovered leaf-to-root over mediator states:
//!
//! ```text
//! Bt(j, s~)  = sum_a A(ja, s~) + sum_{j~ in C_{s~}} B(j, j~) - A(p_j, s~)
//! B(j, j~)   = min_{a in A_{j~}} Bt(j, j~a)
//! ```
//!
//! A negative completed mass proves the input map leaves the polytope.

use ndarray::Array2;

use crate::game_core::{Tfdp, VERIFICATION_TOL};

use super::dag::UtcDag;
use super::deviation::UtcError;

/// Rewrites every row of `a_raw` into canonical form. Each row is treated
/// as a linear functional on the mediator polytope; the functional's
/// values on pure strategies are preserved exactly. Fails if a row's
/// canonical root coefficient comes out negative, i.e. the functional was
/// negative on some pure strategy.
pub fn canonicalize_rows(a_raw: &Array2<f64>, med: &Tfdp) -> Result<Array2<f64>, UtcError> {
    let mut a = a_raw.clone();
    if a.ncols() != med.d {
        return Err(UtcError::DimensionMismatch {
            got: a.ncols(),
            expected: med.d,
        });
    }
    for (row_idx, mut row) in a.outer_iter_mut().enumerate() {
        // Bottom-up: children decision points precede their parents in
        // reverse discovery order.
        for j in (0..med.n_dps()).rev() {
            let dp = &med.dps[j];
            let mut m = f64::INFINITY;
            for k in 0..dp.n_actions {
                m = m.min(row[dp.first_seq + k]);
            }
            for k in 0..dp.n_actions {
                row[dp.first_seq + k] -= m;
            }
            row[dp.parent_seq] += m;
        }
        if row[0] < -VERIFICATION_TOL {
            return Err(UtcError::NegativeFunctional {
                row: row_idx,
                value: row[0],
            });
        }
    }
    Ok(a)
}

/// Completes a row-canonical `A` to a feasible `(A, B)` pair, evaluating
/// the completion leaf-to-root over mediator sequences. Fails on negative
/// completed mass beyond the verification tolerance.
pub fn complete_matrix(a: &Array2<f64>, dag: &UtcDag) -> Result<Array2<f64>, UtcError> {
    let (real, med) = (&dag.real, &dag.med);
    if a.dim() != (real.d, med.d) {
        return Err(UtcError::ShapeMismatch {
            a: a.dim(),
            b: (0, 0),
            ea: (real.d, med.d),
            eb: (real.n_dps(), med.n_dps()),
        });
    }
    let mut b = Array2::zeros((real.n_dps(), med.n_dps()));
    let mut bt = vec![0.0; med.d];
    for j in 0..real.n_dps() {
        let rdp = &real.dps[j];
        // Reverse discovery order interleaves each decision point's
        // sequence block (processed first) with the point itself, so every
        // Bt value needed by a min, and every completed B needed by a Bt,
        // is ready when read.
        for mj in (0..med.n_dps()).rev() {
            let mdp = &med.dps[mj];
            for k in (0..mdp.n_actions).rev() {
                let mseq = mdp.first_seq + k;
                let mut v = -a[[rdp.parent_seq, mseq]];
                for r in 0..rdp.n_actions {
                    v += a[[rdp.first_seq + r, mseq]];
                }
                for &child in &med.seq_children[mseq] {
                    v += b[[j, child]];
                }
                bt[mseq] = v;
            }
            let mut m = f64::INFINITY;
            for k in 0..mdp.n_actions {
                m = m.min(bt[mdp.first_seq + k]);
            }
            b[[j, mj]] = m;
            if m < -VERIFICATION_TOL {
                return Err(UtcError::NegativeCompletion {
                    dp: j,
                    mdp: mj,
                    value: m,
                });
            }
        }
    }
    Ok(b)
}
