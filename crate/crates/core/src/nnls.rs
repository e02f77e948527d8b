//! Nonnegative least squares by the Lawson-Hanson active-set method.
//!
//! Minimizes `‖A c − b‖₂` over `c ≥ 0`, where the columns of `A` are supplied
//! as slices. The problems in this crate are small and dense, so each passive
//! set is solved from scratch with an SVD.

use crate::error::{Error, Result};
use crate::linalg::{dot, least_squares, max_abs, norm};

/// Solution of a nonnegative least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    /// Nonnegative coefficients, one per column.
    pub coefficients: Vec<f64>,
    /// `A c`.
    pub fitted: Vec<f64>,
    /// Dual vector `Aᵀ(b − A c)`; nonpositive off the passive set at optimum.
    pub dual: Vec<f64>,
    /// Outer iterations used.
    pub iterations: usize,
}

/// Iteration cap used by [`nnls`] for a problem with `columns` columns in `rows` dimensions.
pub fn iteration_cap(columns: usize, rows: usize) -> usize {
    10 * columns.max(rows).max(1)
}

fn fitted(columns: &[&[f64]], coef: &[f64], rows: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows];
    for (col, &c) in columns.iter().zip(coef) {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += c * v;
            }
        }
    }
    out
}

fn dual(columns: &[&[f64]], target: &[f64], fit: &[f64]) -> Vec<f64> {
    let resid: Vec<f64> = target.iter().zip(fit).map(|(b, f)| b - f).collect();
    columns.iter().map(|col| dot(col, &resid)).collect()
}

/// Solve `min ‖Σ c_j a_j − b‖` subject to `c ≥ 0`.
///
/// All columns must have the same length as `target`.
pub fn nnls(columns: &[&[f64]], target: &[f64]) -> Result<NnlsSolution> {
    let rows = target.len();
    for col in columns {
        if col.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: col.len(),
            });
        }
    }
    let n = columns.len();
    let col_scale = columns.iter().fold(0.0_f64, |m, c| m.max(max_abs(c)));
    let scale = col_scale * (col_scale + norm(target));
    let threshold = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let cap = iteration_cap(n, rows);

    let mut coef = vec![0.0; n];
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let mut fit = vec![0.0; rows];
    let mut w = dual(columns, target, &fit);
    let mut iterations = 0;

    loop {
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > threshold)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(entering) = candidate else { break };
        iterations += 1;
        if iterations > cap {
            return Err(Error::NonConvergence { iterations: cap });
        }
        passive[entering] = true;

        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let cols: Vec<&[f64]> = idx.iter().map(|&j| columns[j]).collect();
            let z = least_squares(&cols, target);
            if first {
                first = false;
                let pos = idx.iter().position(|&j| j == entering).expect("entering is passive");
                if z[pos] <= 0.0 {
                    // rounding made the entering column look useful; skip it
                    passive[entering] = false;
                    blocked[entering] = true;
                    break;
                }
            }
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in idx.iter().zip(&z) {
                    coef[j] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            // step toward z until the first passive coefficient hits zero
            let mut alpha = f64::INFINITY;
            for (&j, &v) in idx.iter().zip(&z) {
                if v <= 0.0 {
                    let a = coef[j] / (coef[j] - v);
                    alpha = alpha.min(a);
                }
            }
            let floor = 4.0 * f64::EPSILON * max_abs(&z).max(max_abs(&coef));
            for (&j, &v) in idx.iter().zip(&z) {
                coef[j] += alpha * (v - coef[j]);
                if coef[j] <= floor {
                    coef[j] = 0.0;
                    passive[j] = false;
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        fit = fitted(columns, &coef, rows);
        w = dual(columns, target, &fit);
    }

    Ok(NnlsSolution {
        coefficients: coef,
        fitted: fit,
        dual: w,
        iterations,
    })
}
