//! Minimal dense linear algebra used internally: a semidefinite-tolerant
//! Cholesky factorization and a normal-equations least-squares solver.

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive semidefinite
/// matrix (row-major, n x n). Pivots within `tol * max_diag` of zero are set
/// to zero (exactly singular directions); negative pivots beyond the
/// tolerance report failure.
pub fn cholesky_psd(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max);
    let tol = 1e-12 * max_diag.max(1e-300);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d < -tol {
            return Err(Error::Numeric(format!(
                "matrix not positive semidefinite (pivot {d:.3e} at {j})"
            )));
        }
        if d <= tol {
            // singular direction: zero column, dependent rows stay consistent
            l[j * n + j] = 0.0;
            continue;
        }
        let dj = d.sqrt();
        l[j * n + j] = dj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / dj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L` (zero pivots pass zeros through).
fn forward_substitute(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = if l[i * n + i] != 0.0 {
            s / l[i * n + i]
        } else {
            0.0
        };
    }
    y
}

/// Solves `L^T x = y`.
fn backward_substitute(l: &[f64], n: usize, y: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = if l[i * n + i] != 0.0 {
            s / l[i * n + i]
        } else {
            0.0
        };
    }
    x
}

/// Least squares `min ‖W^(1/2)(B c - y)‖` via normal equations and Cholesky.
/// `b` is row-major (rows x cols), `w` optional per-row weights. Fails if the
/// normal matrix is rank deficient.
pub fn weighted_least_squares(
    b: &[f64],
    rows: usize,
    cols: usize,
    y: &[f64],
    w: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut btb = vec![0.0; cols * cols];
    let mut bty = vec![0.0; cols];
    for r in 0..rows {
        let wr = w.map_or(1.0, |w| w[r]);
        let row = &b[r * cols..(r + 1) * cols];
        for i in 0..cols {
            if row[i] == 0.0 {
                continue;
            }
            bty[i] += wr * row[i] * y[r];
            for j in i..cols {
                btb[i * cols + j] += wr * row[i] * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            btb[i * cols + j] = btb[j * cols + i];
        }
    }
    let l = cholesky_psd(&btb, cols)?;
    // a zero pivot means a basis function unsupported by the data
    for i in 0..cols {
        if l[i * cols + i] == 0.0 {
            return Err(Error::Numeric(format!(
                "rank-deficient design: column {i} carries no information"
            )));
        }
    }
    let yv = forward_substitute(&l, cols, &bty);
    Ok(backward_substitute(&l, cols, &yv))
}
