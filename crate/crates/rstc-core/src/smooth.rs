//! Least-squares cubic B-spline smoothing of reported mean curves.
//!
//! Knots are clamped: the grid endpoints repeat with multiplicity 4 and the
//! interior knots are equally spaced strictly inside the grid span. Fitting
//! is a plain least-squares projection onto the spline space.

use crate::error::{Error, Result};
use crate::grid::{Curve, TimeGrid};
use crate::linalg::weighted_least_squares;

const DEGREE: usize = 3;

/// A fitted cubic B-spline: interior knots, basis coefficients, and the
/// fitted values on the grid it was fit on.
#[derive(Debug, Clone)]
pub struct SplineFit {
    pub knots: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub fitted: Curve,
}

/// Full clamped knot vector for the span `[a, b]` with the given interior knots.
fn clamped_knots(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut t = vec![a; DEGREE + 1];
    t.extend_from_slice(interior);
    t.extend(std::iter::repeat(b).take(DEGREE + 1));
    t
}

/// Evaluates all `n_basis` cubic B-spline basis functions at `x` by the
/// Cox–de Boor recursion. The right endpoint maps into the last span so the
/// basis sums to one on the closed interval.
fn basis_row(knots: &[f64], n_basis: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_basis];
    let last = knots[knots.len() - 1];
    // locate the knot span: largest i with knots[i] <= x < knots[i+1]
    let x_eff = if x >= last { last } else { x };
    let mut span = DEGREE;
    while span + 1 < knots.len() - DEGREE - 1 && knots[span + 1] <= x_eff {
        span += 1;
    }
    if x >= last {
        span = knots.len() - DEGREE - 2;
    }
    // triangular recursion over the nonzero basis values in this span
    let mut vals = [0.0f64; DEGREE + 1];
    vals[0] = 1.0;
    let mut left = [0.0f64; DEGREE + 1];
    let mut right = [0.0f64; DEGREE + 1];
    for j in 1..=DEGREE {
        left[j] = x_eff - knots[span + 1 - j];
        right[j] = knots[span + j] - x_eff;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let term = if denom != 0.0 { vals[r] / denom } else { 0.0 };
            vals[r] = saved + right[r + 1] * term;
            saved = left[j - r] * term;
        }
        vals[j] = saved;
    }
    for (r, &v) in vals.iter().enumerate() {
        let idx = span - DEGREE + r;
        if idx < n_basis {
            out[idx] = v;
        }
    }
    out
}

/// Least-squares cubic B-spline fit with `n_interior_knots` equally spaced
/// interior knots. Requires more grid points than basis functions
/// (`grid.len() >= n_interior_knots + 4`).
pub fn bspline_fit(curve: &Curve, grid: &TimeGrid, n_interior_knots: usize) -> Result<SplineFit> {
    let l = grid.len();
    if curve.len() != l {
        return Err(Error::LengthMismatch {
            context: "bspline_fit curve vs grid",
            expected: l,
            got: curve.len(),
        });
    }
    let n_basis = n_interior_knots + DEGREE + 1;
    if l < n_basis {
        return Err(Error::InvalidArgument(format!(
            "grid length {l} below basis dimension {n_basis}"
        )));
    }
    let (a, b) = (grid.points()[0], grid.points()[l - 1]);
    let interior: Vec<f64> = (1..=n_interior_knots)
        .map(|i| a + (b - a) * i as f64 / (n_interior_knots + 1) as f64)
        .collect();
    let knots = clamped_knots(a, b, &interior);

    let mut design = Vec::with_capacity(l * n_basis);
    for &x in grid.points() {
        design.extend(basis_row(&knots, n_basis, x));
    }
    let coefficients = weighted_least_squares(&design, l, n_basis, curve.values(), None)?;

    let fitted_vals: Vec<f64> = (0..l)
        .map(|r| {
            design[r * n_basis..(r + 1) * n_basis]
                .iter()
                .zip(&coefficients)
                .map(|(b, c)| b * c)
                .sum()
        })
        .collect();
    Ok(SplineFit {
        knots: interior,
        coefficients,
        fitted: Curve::new(fitted_vals)?,
    })
}
