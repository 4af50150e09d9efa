//! Angular depth for functional data, a Monte-Carlo projection estimator used
//! as a testing oracle, and the depth-based trimmed mean.
//!
//! The production depth is the pairwise closed form
//! `D(z|X) = (2/pi) * E[ Acos(X1 - z, X2 - z) ]`, estimated over all unordered
//! pairs of distinct sample curves. The projection estimator approximates the
//! defining integral `1 - 4 * E_u[(F_u(<u,z>) - 1/2)^2]` over random Gaussian
//! directions and exists so the two routes can be checked against each other.

use crate::error::{Error, Result};
use crate::grid::{inner_product, norm, Curve, TimeGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Per-sample depth values and the ascending-depth ranking.
#[derive(Debug, Clone)]
pub struct DepthReport {
    depths: Vec<f64>,
    ranks: Vec<usize>,
}

impl DepthReport {
    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    /// `ranks[i]` is the 1-based rank of sample `i` when ordered by ascending
    /// depth (rank 1 = most outlying, rank n = deepest); ties break by index.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Sample indices ordered by ascending depth, ties by index.
    pub fn ordering(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.depths.len()).collect();
        idx.sort_by(|&a, &b| {
            self.depths[a]
                .partial_cmp(&self.depths[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    }

    /// Index of the deepest sample.
    pub fn deepest(&self) -> usize {
        *self.ordering().last().unwrap()
    }
}

/// Depth-trimmed pointwise mean of a curve subset.
#[derive(Debug, Clone)]
pub struct TrimmedMean {
    pub curve: Curve,
    /// Indices (into the subset) of the retained curves, ascending.
    pub retained: Vec<usize>,
    pub alpha: f64,
}

/// Angle in `[0, pi]` between two nonzero curves under the grid inner
/// product: `arccos` of the cosine similarity with round-off kept inside
/// `[-1, 1]`. Evaluated in the half-angle form
/// `2 * atan2(‖a/‖a‖ - b/‖b‖‖, ‖a/‖a‖ + b/‖b‖‖)`, which is algebraically the
/// clamped arccos but stays exact for coincident, parallel, and antipodal
/// inputs instead of losing ~1e-8 near cos = ±1.
pub fn angle(a: &Curve, b: &Curve, grid: &TimeGrid) -> Result<f64> {
    let na = norm(a, grid)?;
    let nb = norm(b, grid)?;
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    let w = grid.trapezoid_weights();
    Ok(angle_normalized(
        &unit_values(a, na),
        &unit_values(b, nb),
        &w,
    ))
}

fn unit_values(c: &Curve, n: f64) -> Vec<f64> {
    c.values().iter().map(|v| v / n).collect()
}

/// Half-angle formula on already-normalized value vectors.
fn angle_normalized(u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let mut diff2 = 0.0;
    let mut sum2 = 0.0;
    for j in 0..u.len() {
        let d = u[j] - v[j];
        let s = u[j] + v[j];
        diff2 += w[j] * d * d;
        sum2 += w[j] * s * s;
    }
    2.0 * diff2.max(0.0).sqrt().atan2(sum2.max(0.0).sqrt())
}

/// Closed-form angular depth of `z` with respect to `sample`: the average of
/// `angle(Xi - z, Xj - z)` over unordered pairs, scaled by `2/pi`.
///
/// Curves whose difference from `z` has zero norm are skipped and the pair
/// count renormalized; fewer than 2 usable curves is an error. The empirical
/// value may exceed 1 in degenerate collinear configurations; no clamping is
/// applied because downstream consumers only use the ordering.
pub fn angular_depth(z: &Curve, sample: &[&Curve], grid: &TimeGrid) -> Result<f64> {
    let mut diffs: Vec<Curve> = Vec::with_capacity(sample.len());
    for x in sample {
        let d = x.sub(z)?;
        if norm(&d, grid)? > 0.0 {
            diffs.push(d);
        }
    }
    if diffs.len() < 2 {
        return Err(Error::InsufficientSample {
            context: "angular_depth usable curves",
            needed: 2,
            got: diffs.len(),
        });
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..diffs.len() {
        for j in i + 1..diffs.len() {
            sum += angle(&diffs[i], &diffs[j], grid)?;
            pairs += 1;
        }
    }
    let mean = sum / pairs as f64;
    Ok(2.0 * (mean / std::f64::consts::PI))
}

/// Leave-one-out depth of every curve in the subset, with ascending ranks.
pub fn depth_vector(subset: &[&Curve], grid: &TimeGrid) -> Result<DepthReport> {
    let n = subset.len();
    if n < 3 {
        return Err(Error::InsufficientSample {
            context: "depth_vector subset",
            needed: 3,
            got: n,
        });
    }
    let mut depths = Vec::with_capacity(n);
    for i in 0..n {
        let rest: Vec<&Curve> = subset
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| *c)
            .collect();
        depths.push(angular_depth(subset[i], &rest, grid)?);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| depths[a].partial_cmp(&depths[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    Ok(DepthReport { depths, ranks })
}

/// Monte-Carlo estimator of the projection form of depth. Draws
/// `num_directions` directions with independent standard-normal coordinates
/// on the grid, computes the empirical CDF of `<u, X>` at `<u, z>` per
/// direction, and returns `1 - 4 * mean[(F - 1/2)^2]`. Testing oracle only.
pub fn projection_depth_oracle(
    z: &Curve,
    sample: &[&Curve],
    grid: &TimeGrid,
    num_directions: usize,
    seed: u64,
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample {
            context: "projection_depth_oracle sample",
            needed: 1,
            got: 0,
        });
    }
    if num_directions < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 directions, got {num_directions}"
        )));
    }
    let l = grid.len();
    let n = sample.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..num_directions {
        let u = Curve::new(
            (0..l)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect::<Vec<f64>>(),
        )?;
        let uz = inner_product(&u, z, grid)?;
        let mut count = 0usize;
        for x in sample {
            if inner_product(&u, x, grid)? <= uz {
                count += 1;
            }
        }
        let f = count as f64 / n;
        acc += (f - 0.5) * (f - 0.5);
    }
    Ok(1.0 - 4.0 * acc / num_directions as f64)
}

/// Depth-based alpha-trimmed mean. Subsets of size <= 2 and alpha = 0 retain
/// everything; otherwise the `floor(alpha * n)` lowest-depth curves are
/// trimmed, ties broken by index ascending (lower indices trimmed first).
/// A subset whose depths are undefined (all-coincident curves) also retains
/// everything, since no ordering exists to trim by.
pub fn trimmed_mean(subset: &[&Curve], grid: &TimeGrid, alpha: f64) -> Result<TrimmedMean> {
    let n = subset.len();
    if n == 0 {
        return Err(Error::InsufficientSample {
            context: "trimmed_mean subset",
            needed: 1,
            got: 0,
        });
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0, 1), got {alpha}"
        )));
    }
    let m = (alpha * n as f64).floor() as usize;
    let retained: Vec<usize> = if n <= 2 || m == 0 {
        (0..n).collect()
    } else {
        match depth_vector(subset, grid) {
            Ok(report) => {
                let mut keep: Vec<usize> = report.ordering()[m..].to_vec();
                keep.sort_unstable();
                keep
            }
            Err(Error::InsufficientSample { .. }) => (0..n).collect(),
            Err(e) => return Err(e),
        }
    };
    let kept: Vec<&Curve> = retained.iter().map(|&i| subset[i]).collect();
    let curve = Curve::mean(&kept)?;
    Ok(TrimmedMean {
        curve,
        retained,
        alpha,
    })
}
