//! Shared domain types: time grids, curves, datasets, partitions, and the
//! basic curve arithmetic every other module builds on.
//!
//! Integrals are approximated with the composite trapezoid rule on the
//! (possibly non-uniform) grid, which is exact for piecewise-linear curves.

use crate::error::{Error, Result};

/// Ordered time points shared by all curves of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    /// Builds a grid from strictly increasing time points (at least 2).
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid point".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// Uniform grid of `len` points over `[a, b]`.
    pub fn uniform(a: f64, b: f64, len: usize) -> Result<Self> {
        if len < 2 || b <= a {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs len >= 2 and b > a, got len {len}, [{a}, {b}]"
            )));
        }
        let h = (b - a) / (len - 1) as f64;
        Self::new((0..len).map(|i| a + i as f64 * h).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Trapezoid quadrature weights: w_1 = (t_2-t_1)/2, w_j = (t_{j+1}-t_{j-1})/2,
    /// w_l = (t_l - t_{l-1})/2.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let t = &self.points;
        let l = t.len();
        let mut w = vec![0.0; l];
        w[0] = (t[1] - t[0]) / 2.0;
        w[l - 1] = (t[l - 1] - t[l - 2]) / 2.0;
        for j in 1..l - 1 {
            w[j] = (t[j + 1] - t[j - 1]) / 2.0;
        }
        w
    }
}

/// One sample's discretized function on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    values: Vec<f64>,
}

impl Curve {
    /// Builds a curve; every value must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite curve value".into()));
        }
        Ok(Self { values })
    }

    /// Constant curve with `len` points.
    pub fn constant(value: f64, len: usize) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    /// Samples `f` on the grid.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.points().iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Curve) -> Result<Curve> {
        check_len("curve subtraction", self.len(), other.len())?;
        Ok(Curve {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise sum `self + other`.
    pub fn add(&self, other: &Curve) -> Result<Curve> {
        check_len("curve addition", self.len(), other.len())?;
        Ok(Curve {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Pointwise scaling.
    pub fn scale(&self, c: f64) -> Curve {
        Curve {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Pointwise arithmetic mean of the given curves (must be nonempty, equal length).
    pub fn mean(curves: &[&Curve]) -> Result<Curve> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidArgument("mean of zero curves".into()))?;
        let l = first.len();
        let mut acc = vec![0.0; l];
        for c in curves {
            check_len("curve mean", l, c.len())?;
            for (a, v) in acc.iter_mut().zip(c.values()) {
                *a += v;
            }
        }
        let n = curves.len() as f64;
        for a in acc.iter_mut() {
            *a /= n;
        }
        Ok(Curve { values: acc })
    }
}

/// A location on the sphere (degrees) or in the plane, depending on the metric in use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPoint {
    pub lon: f64,
    pub lat: f64,
}

impl SpatialPoint {
    pub fn new(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }

    /// Checks the ranges that the geodesic metric requires.
    pub fn validate_geodetic(&self) -> Result<()> {
        if !(self.lon.is_finite() && self.lat.is_finite())
            || self.lon < -180.0
            || self.lon > 180.0
            || self.lat < -90.0
            || self.lat > 90.0
        {
            return Err(Error::CoordinateOutOfRange {
                lon: self.lon,
                lat: self.lat,
            });
        }
        Ok(())
    }
}

/// One sample: an id, a location, and a curve on the dataset grid.
#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub location: SpatialPoint,
    pub curve: Curve,
}

/// Curves plus locations plus ids on a common grid.
#[derive(Debug, Clone)]
pub struct Dataset {
    grid: TimeGrid,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(grid: TimeGrid, samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let l = grid.len();
        for s in &samples {
            if s.curve.len() != l {
                return Err(Error::LengthMismatch {
                    context: "dataset curve vs grid",
                    expected: l,
                    got: s.curve.len(),
                });
            }
        }
        let mut ids: Vec<&str> = samples.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Ingest(format!("duplicate sample id `{}`", dup[0])));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn curves(&self) -> Vec<&Curve> {
        self.samples.iter().map(|s| &s.curve).collect()
    }

    pub fn locations(&self) -> Vec<SpatialPoint> {
        self.samples.iter().map(|s| s.location).collect()
    }
}

/// Cluster label per sample, labels in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("cluster count must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty partition".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&z| z == 0 || z > k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 1..={k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Indices of the samples carrying label `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &z)| z == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Distinct labels actually present, ascending.
    pub fn present_labels(&self) -> Vec<usize> {
        let mut seen = vec![false; self.k + 1];
        for &z in &self.labels {
            seen[z] = true;
        }
        (1..=self.k).filter(|&k| seen[k]).collect()
    }
}

fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

/// Trapezoid approximation of the inner product `∫ a(t) b(t) dt` over the grid.
pub fn inner_product(a: &Curve, b: &Curve, grid: &TimeGrid) -> Result<f64> {
    check_len("inner_product curve a vs grid", grid.len(), a.len())?;
    check_len("inner_product curve b vs grid", grid.len(), b.len())?;
    let w = grid.trapezoid_weights();
    let mut acc = 0.0;
    for j in 0..grid.len() {
        acc += w[j] * a.values()[j] * b.values()[j];
    }
    Ok(acc)
}

/// The induced norm `sqrt(∫ a²)`.
pub fn norm(a: &Curve, grid: &TimeGrid) -> Result<f64> {
    Ok(inner_product(a, a, grid)?.max(0.0).sqrt())
}

/// L2 distance `‖a - b‖` under the trapezoid inner product.
pub fn l2_distance(a: &Curve, b: &Curve, grid: &TimeGrid) -> Result<f64> {
    let d = a.sub(b)?;
    norm(&d, grid)
}

/// Fills interior gaps by linear interpolation in time; leading/trailing gaps
/// take the nearest observed value. `max_missing_frac` caps the tolerated
/// fraction of missing entries (the ingest default is 0.05).
pub fn interpolate_missing(
    values: &[Option<f64>],
    grid: &TimeGrid,
    max_missing_frac: f64,
) -> Result<Curve> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            context: "interpolate_missing values vs grid",
            expected: grid.len(),
            got: values.len(),
        });
    }
    let observed: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_some())
        .map(|(j, _)| j)
        .collect();
    if observed.len() < 2 {
        return Err(Error::Ingest(format!(
            "need at least 2 observed values, got {}",
            observed.len()
        )));
    }
    let missing = values.len() - observed.len();
    let frac = missing as f64 / values.len() as f64;
    if frac > max_missing_frac {
        return Err(Error::Ingest(format!(
            "missing fraction {frac:.4} exceeds cap {max_missing_frac:.4}"
        )));
    }
    if missing == 0 {
        return Curve::new(values.iter().map(|v| v.unwrap()).collect());
    }
    let t = grid.points();
    let mut out = vec![0.0; values.len()];
    let first = observed[0];
    let last = *observed.last().unwrap();
    for j in 0..values.len() {
        out[j] = match values[j] {
            Some(v) => v,
            None if j < first => values[first].unwrap(),
            None if j > last => values[last].unwrap(),
            None => {
                // interior gap: bracket by nearest observed neighbours in time
                let lo = *observed.iter().rev().find(|&&o| o < j).unwrap();
                let hi = *observed.iter().find(|&&o| o > j).unwrap();
                let (vl, vh) = (values[lo].unwrap(), values[hi].unwrap());
                vl + (vh - vl) * (t[j] - t[lo]) / (t[hi] - t[lo])
            }
        };
    }
    Curve::new(out)
}
