//! Small dense linear algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Symmetric positive-definite solve by Cholesky factorization.
///
/// `matrix` is row-major `n x n`. A pivot is rejected when it falls below
/// `threshold * max_diag`; the error carries the index of the rejected pivot.
pub(crate) fn cholesky_solve(
    matrix: &[f64],
    n: usize,
    rhs: &[f64],
    threshold: f64,
) -> Result<Vec<f64>, usize> {
    debug_assert_eq!(matrix.len(), n * n);
    let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(matrix[i * n + i]));
    let floor = threshold * max_diag;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= floor || sum <= 0.0 {
                    return Err(i);
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}

/// Minimum-norm least-squares solution of `columns * coef ≈ target`.
///
/// Each entry of `columns` is one column of the design matrix.
pub(crate) fn least_squares(columns: &[&[f64]], target: &[f64]) -> Vec<f64> {
    let rows = target.len();
    let cols = columns.len();
    if cols == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(target);
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let eps = largest * 1e-13 * (rows.max(cols) as f64);
    let Ok(mut x) = svd.solve(&b, eps) else {
        return vec![0.0; cols];
    };
    // the SVD solve alone loses a few digits; refine against the residual
    for _ in 0..2 {
        let residual = &b - &a * &x;
        match svd.solve(&residual, eps) {
            Ok(dx) => x += dx,
            Err(_) => break,
        }
    }
    x.iter().copied().collect()
}
