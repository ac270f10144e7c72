//! Fixed points of linear deviations: find `x` in the sequence-form
//! polytope with `A x = x`.
//!
//! Such a point always exists for a feasible deviation, because `x -> Ax`
//! maps the compact convex polytope into itself. The solver tries, in
//! order:
//!
//! 1. power-iteration polish from a warm start (the previous iterate in
//!    self-play, else the uniform strategy): pure matvecs, O(d^2) per
//!    step, accepted only when the verified residual meets tolerance.
//!    In self-play consecutive deviations change slowly, so this carries
//!    most iterations on large games;
//! 2. a least-squares solve of the consistent equality system
//!    `{x(root) = 1, flow conservation, (A - I) x = 0}` — first by
//!    normal equations with Cholesky, then by truncated SVD, both with
//!    iterative refinement against the original system;
//! 3. active-set nonnegative least squares (Lawson-Hanson) over
//!    `{min |M x - b|, x >= 0}`, whose optimum is a nonnegative solution;
//!    the passive-set subproblems are solved by truncated SVD with
//!    iterative refinement. A plain phase-one simplex stalls here: the
//!    right-hand side is a single 1 among zeros, so almost every pivot is
//!    degenerate;
//! 4. a Cesaro-averaged power iteration `(1/K) sum A^k x0`, whose
//!    averaged residual shrinks like `2 diam / K`. Too slow for tight
//!    tolerances, it serves as an independent oracle and a last resort.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::game_core::{Tfdp, INPUT_TOL};
use crate::utc::{check_constraints, UtcDag, UtcDeviation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpMethod {
    Power,
    LeastSquares,
    Nnls,
    Cesaro,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub x: Vec<f64>,
    /// `max |A x - x|`.
    pub residual: f64,
    /// Sequence-form residual of `x`.
    pub seq_residual: f64,
    pub method: FpMethod,
}

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("deviation is not a self-map (A is {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("deviation infeasible (constraint residual {residual})")]
    InfeasibleDeviation { residual: f64 },
    #[error("fixed-point solver failed to reach eps={eps} (best residual {best})")]
    Budget { eps: f64, best: f64 },
}

/// Computes a fixed point of the deviation on its own polytope with both
/// residuals at most `eps`.
pub fn fixed_point(
    dev: &UtcDeviation,
    dag: &UtcDag,
    eps: f64,
) -> Result<FixedPoint, FixedPointError> {
    fixed_point_from(dev, dag, eps, None)
}

/// Like [`fixed_point`], seeded with a warm-start strategy (usually the
/// previous iterate of a learning loop).
pub fn fixed_point_from(
    dev: &UtcDeviation,
    dag: &UtcDag,
    eps: f64,
    warm: Option<&[f64]>,
) -> Result<FixedPoint, FixedPointError> {
    let (rows, cols) = dev.a.dim();
    if rows != cols {
        return Err(FixedPointError::NotSquare { rows, cols });
    }
    let report = check_constraints(dev, dag).map_err(|_| FixedPointError::NotSquare {
        rows,
        cols,
    })?;
    if report.max_residual > INPUT_TOL {
        return Err(FixedPointError::InfeasibleDeviation {
            residual: report.max_residual,
        });
    }
    let tfdp = &dag.real;
    let mut best: Option<FixedPoint> = None;
    let mut consider = |cand: Option<FixedPoint>| -> Option<FixedPoint> {
        if let Some(c) = cand {
            let score = c.residual.max(c.seq_residual);
            if score <= eps {
                return Some(c);
            }
            if best
                .as_ref()
                .map(|b| score < b.residual.max(b.seq_residual))
                .unwrap_or(true)
            {
                best = Some(c);
            }
        }
        None
    };

    let start: Vec<f64> = match warm {
        Some(x)
            if x.len() == tfdp.d
                && tfdp.check_sequence_form(x).map(|r| r <= eps).unwrap_or(false) =>
        {
            x.to_vec()
        }
        _ => tfdp.push_behavioral(&tfdp.uniform_behavioral()),
    };
    if let Some(done) = consider(power_polish(dev, tfdp, start, eps, 256)) {
        return Ok(done);
    }

    let (m_rows, b) = equality_system(dev, tfdp);
    if let Some(done) = consider(least_squares(&m_rows, &b, dev, tfdp, eps)) {
        return Ok(done);
    }
    if let Some(done) = consider(nnls_path(&m_rows, &b, dev, tfdp)) {
        return Ok(done);
    }
    let (x, _) = cesaro_fixed_point(dev, tfdp, 200_000);
    if let Some(done) = consider(Some(evaluate(x, dev, tfdp, FpMethod::Cesaro))) {
        return Ok(done);
    }
    Err(FixedPointError::Budget {
        eps,
        best: best
            .map(|b| b.residual.max(b.seq_residual))
            .unwrap_or(f64::INFINITY),
    })
}

/// Plain power iteration with verified residuals: each step is one
/// matvec; stops early on success or stagnation. Iterates stay in the
/// polytope because the map is a polytope self-map.
fn power_polish(
    dev: &UtcDeviation,
    tfdp: &Tfdp,
    start: Vec<f64>,
    eps: f64,
    max_steps: usize,
) -> Option<FixedPoint> {
    let mut x = start;
    let mut best_x = x.clone();
    let mut best_res = f64::INFINITY;
    let mut stall = 0;
    for _ in 0..max_steps {
        let y = matvec(dev, &x);
        // Residual of the current point x, not of y.
        let res = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if res < 0.9 * best_res {
            stall = 0;
        } else {
            stall += 1;
        }
        if res < best_res {
            best_res = res;
            best_x.copy_from_slice(&x);
        }
        x = y;
        if best_res <= eps * 0.5 || stall >= 15 {
            break;
        }
    }
    Some(evaluate(best_x, dev, tfdp, FpMethod::Power))
}

fn matvec(dev: &UtcDeviation, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; dev.a.nrows()];
    for (s, row) in dev.a.outer_iter().enumerate() {
        y[s] = row.iter().zip(x).map(|(a, v)| a * v).sum();
    }
    y
}

/// Rows of the equality system `M x = b`: root mass, flow conservation,
/// then `(A - I) x = 0`.
fn equality_system(dev: &UtcDeviation, tfdp: &Tfdp) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = tfdp.d;
    let mut rows = Vec::with_capacity(1 + tfdp.n_dps() + d);
    let mut b = Vec::with_capacity(rows.capacity());
    let mut root = vec![0.0; d];
    root[0] = 1.0;
    rows.push(root);
    b.push(1.0);
    for dp in &tfdp.dps {
        let mut r = vec![0.0; d];
        r[dp.parent_seq] += 1.0;
        for a in 0..dp.n_actions {
            r[dp.first_seq + a] -= 1.0;
        }
        rows.push(r);
        b.push(0.0);
    }
    for s in 0..d {
        let mut r: Vec<f64> = dev.a.row(s).iter().copied().collect();
        r[s] -= 1.0;
        rows.push(r);
        b.push(0.0);
    }
    (rows, b)
}

fn evaluate(x: Vec<f64>, dev: &UtcDeviation, tfdp: &Tfdp, method: FpMethod) -> FixedPoint {
    let residual = fp_residual(dev, &x);
    let seq_residual = tfdp.check_sequence_form(&x).expect("dimension fixed");
    FixedPoint {
        x,
        residual,
        seq_residual,
        method,
    }
}

fn fp_residual(dev: &UtcDeviation, x: &[f64]) -> f64 {
    let mut r = 0.0f64;
    for (s, row) in dev.a.outer_iter().enumerate() {
        let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        r = r.max((ax - x[s]).abs());
    }
    r
}

/// Truncated-SVD solve with iterative refinement. Refinement in fixed
/// precision drives the residual toward backward-stable levels even when
/// the system is badly conditioned, as long as it keeps improving.
fn refined_svd_solve(
    mat: &DMatrix<f64>,
    svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    b: &DVector<f64>,
    eps: f64,
) -> Option<DVector<f64>> {
    let mut x = svd.solve(b, eps).ok()?;
    let mut best_res = (b - mat * &x).amax();
    for _ in 0..3 {
        let r = b - mat * &x;
        let dx = match svd.solve(&r, eps) {
            Ok(d) => d,
            Err(_) => break,
        };
        let cand = &x + &dx;
        let res = (b - mat * &cand).amax();
        if res < best_res {
            best_res = res;
            x = cand;
        } else {
            break;
        }
    }
    Some(x)
}

/// Least squares by normal equations: much cheaper than an SVD and good
/// enough whenever Cholesky succeeds and refinement converges.
fn normal_eq_solve(mat: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let gram = mat.tr_mul(mat);
    let chol = gram.cholesky()?;
    let mut x = chol.solve(&mat.tr_mul(b));
    let mut best_res = (b - mat * &x).amax();
    for _ in 0..3 {
        let r = b - mat * &x;
        let dx = chol.solve(&mat.tr_mul(&r));
        let cand = &x + &dx;
        let res = (b - mat * &cand).amax();
        if res < best_res {
            best_res = res;
            x = cand;
        } else {
            break;
        }
    }
    Some(x)
}

fn least_squares(
    m_rows: &[Vec<f64>],
    b: &[f64],
    dev: &UtcDeviation,
    tfdp: &Tfdp,
    eps: f64,
) -> Option<FixedPoint> {
    let m = m_rows.len();
    let n = tfdp.d;
    let mat = DMatrix::from_fn(m, n, |r, c| m_rows[r][c]);
    let rhs = DVector::from_fn(m, |r, _| b[r]);
    let fast = normal_eq_solve(&mat, &rhs).map(|x| {
        evaluate(
            x.iter().copied().collect(),
            dev,
            tfdp,
            FpMethod::LeastSquares,
        )
    });
    if let Some(fp) = &fast {
        if fp.residual.max(fp.seq_residual) <= eps {
            return fast;
        }
    }
    let svd = mat.clone().svd(true, true);
    let trunc = (svd.singular_values.max() * 1e-14).max(1e-300);
    let slow = refined_svd_solve(&mat, &svd, &rhs, trunc).map(|x| {
        evaluate(
            x.iter().copied().collect(),
            dev,
            tfdp,
            FpMethod::LeastSquares,
        )
    });
    match (fast, slow) {
        (Some(f), Some(s)) => {
            if f.residual.max(f.seq_residual) <= s.residual.max(s.seq_residual) {
                Some(f)
            } else {
                Some(s)
            }
        }
        (f, s) => f.or(s),
    }
}

fn nnls_path(
    m_rows: &[Vec<f64>],
    b: &[f64],
    dev: &UtcDeviation,
    tfdp: &Tfdp,
) -> Option<FixedPoint> {
    let x = nnls(m_rows, b, tfdp.d)?;
    Some(evaluate(x, dev, tfdp, FpMethod::Nnls))
}

/// Solves the passive-set least-squares subproblem accurately: truncated
/// SVD plus iterative refinement.
fn passive_solve(mat: &DMatrix<f64>, cols: &[usize], b: &DVector<f64>) -> Option<DVector<f64>> {
    let sub = mat.select_columns(cols.iter());
    let svd = sub.clone().svd(true, true);
    let eps = (svd.singular_values.max() * 1e-13).max(1e-300);
    refined_svd_solve(&sub, &svd, b, eps)
}

/// Lawson-Hanson nonnegative least squares for `min |M x - b|, x >= 0`.
/// The equality system is consistent with a nonnegative solution, so the
/// optimum is (numerically) an exact solution.
fn nnls(m_rows: &[Vec<f64>], b_in: &[f64], n: usize) -> Option<Vec<f64>> {
    let m = m_rows.len();
    let mat = DMatrix::from_fn(m, n, |r, c| m_rows[r][c]);
    let b = DVector::from_column_slice(b_in);
    let grad_tol = 1e-12 * mat.amax().max(1.0);

    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; n];
    let mut x = DVector::zeros(n);
    let max_outer = 4 * n + 16;
    for _ in 0..max_outer {
        let resid = &b - &mat * &x;
        let w = mat.transpose() * &resid;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !in_passive[j] && w[j] > grad_tol {
                if best.map(|(_, bw)| w[j] > bw).unwrap_or(true) {
                    best = Some((j, w[j]));
                }
            }
        }
        let (enter, _) = match best {
            None => break,
            Some(e) => e,
        };
        passive.push(enter);
        in_passive[enter] = true;

        // Inner loop: restore nonnegativity of the passive-set solution.
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > n + 8 {
                return None;
            }
            let z = passive_solve(&mat, &passive, &b)?;
            let min_z = z.iter().copied().fold(f64::INFINITY, f64::min);
            if min_z > -1e-14 {
                x.fill(0.0);
                for (k, &j) in passive.iter().enumerate() {
                    x[j] = z[k].max(0.0);
                }
                break;
            }
            // Step from x toward z until the first passive variable hits 0.
            let mut alpha = 1.0f64;
            for (k, &j) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (k, &j) in passive.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            let mut k = 0;
            while k < passive.len() {
                let j = passive[k];
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    in_passive[j] = false;
                    passive.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            if passive.is_empty() {
                return None;
            }
        }
    }
    Some(x.iter().copied().collect())
}

/// Cesaro-averaged power iteration: returns `(1/K) sum_{k<K} A^k x0` and
/// its exact fixed-point residual. Every iterate stays in the polytope,
/// so the average is always feasible; the residual decays like `O(1/K)`.
pub fn cesaro_fixed_point(dev: &UtcDeviation, tfdp: &Tfdp, max_pow: usize) -> (Vec<f64>, f64) {
    let d = tfdp.d;
    let mut xk = tfdp.push_behavioral(&tfdp.uniform_behavioral());
    let mut sum = vec![0.0; d];
    let mut k = 0usize;
    while k < max_pow {
        for (s, v) in sum.iter_mut().zip(&xk) {
            *s += v;
        }
        k += 1;
        let mut next = vec![0.0; d];
        for (s, row) in dev.a.outer_iter().enumerate() {
            next[s] = row.iter().zip(&xk).map(|(a, v)| a * v).sum();
        }
        xk = next;
    }
    let avg: Vec<f64> = sum.iter().map(|v| v / k as f64).collect();
    let res = fp_residual(dev, &avg);
    (avg, res)
}
