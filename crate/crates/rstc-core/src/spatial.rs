//! Pairwise spatial distances, percentile thresholds, and the minimum
//! sample-to-cluster distance used by the clustering constraint.

use crate::error::{Error, Result};
use crate::grid::SpatialPoint;

const EARTH_RADIUS_KM: f64 = 6371.0;

/// Distance metric for locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Great-circle distance in km on a sphere of radius 6371 km.
    Geodesic,
    /// Planar distance in coordinate units.
    Euclidean,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Geodesic => write!(f, "geodesic"),
            Metric::Euclidean => write!(f, "euclidean"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(Metric::Geodesic),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Config(format!(
                "unknown metric `{other}` (expected geodesic or euclidean)"
            ))),
        }
    }
}

/// Symmetric n x n matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Strictly-upper-triangle entries, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Great-circle distance in km via the haversine formula.
pub fn geodesic_km(p: &SpatialPoint, q: &SpatialPoint) -> Result<f64> {
    p.validate_geodetic()?;
    q.validate_geodetic()?;
    let lat1 = p.lat.to_radians();
    let lat2 = q.lat.to_radians();
    let dlat = (q.lat - p.lat).to_radians();
    let dlon = (q.lon - p.lon).to_radians();
    let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    let c = 2.0 * a.sqrt().min(1.0).asin();
    Ok(EARTH_RADIUS_KM * c)
}

/// Planar distance in coordinate units.
pub fn euclidean(p: &SpatialPoint, q: &SpatialPoint) -> f64 {
    let dx = p.lon - q.lon;
    let dy = p.lat - q.lat;
    (dx * dx + dy * dy).sqrt()
}

/// Full pairwise distance matrix under the chosen metric.
pub fn pairwise_distances(points: &[SpatialPoint], metric: Metric) -> Result<DistanceMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "pairwise distances need at least 2 points, got {n}"
        )));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = match metric {
                Metric::Geodesic => geodesic_km(&points[i], &points[j])?,
                Metric::Euclidean => euclidean(&points[i], &points[j]),
            };
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data, metric })
}

/// Nearest-rank percentile of the off-diagonal distances (p in (0, 100]).
pub fn distance_percentile(matrix: &DistanceMatrix, p: f64) -> f64 {
    let mut entries = matrix.upper_triangle();
    entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = entries.len();
    let rank = ((p / 100.0 * m as f64).ceil() as usize).clamp(1, m);
    entries[rank - 1]
}

/// Min over `members \ {i}` of `matrix[i][j]`; a singleton own cluster `{i}`
/// is at distance 0 by convention. An empty member set is a contract violation.
pub fn min_distance_to_cluster(
    i: usize,
    members: &[usize],
    matrix: &DistanceMatrix,
) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let mut best: Option<f64> = None;
    for &j in members {
        if j == i {
            continue;
        }
        let d = matrix.get(i, j);
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    match best {
        Some(b) => Ok(b),
        None => Ok(0.0), // members == {i}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn geodesic_identity() {
        let p = SpatialPoint::new(116.4, 39.9);
        assert_eq!(geodesic_km(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_quarter_circle() {
        let a = SpatialPoint::new(0.0, 0.0);
        let b = SpatialPoint::new(90.0, 0.0);
        let d = geodesic_km(&a, &b).unwrap();
        let expect = EARTH_RADIUS_KM * std::f64::consts::FRAC_PI_2;
        assert!((d - expect).abs() < 0.1, "got {d}, expected {expect}");
        assert!((d - 10007.5).abs() < 0.1);
    }

    #[test]
    fn geodesic_half_circle() {
        let a = SpatialPoint::new(0.0, 0.0);
        let b = SpatialPoint::new(180.0, 0.0);
        let d = geodesic_km(&a, &b).unwrap();
        let expect = EARTH_RADIUS_KM * std::f64::consts::PI;
        assert!((d - expect).abs() < 0.1, "got {d}, expected {expect}");
        assert!((d - 20015.1).abs() < 0.1);
    }

    #[test]
    fn geodesic_rejects_bad_coordinates() {
        let bad = SpatialPoint::new(200.0, 0.0);
        let ok = SpatialPoint::new(0.0, 0.0);
        assert!(geodesic_km(&bad, &ok).is_err());
        assert!(geodesic_km(&ok, &SpatialPoint::new(0.0, 91.0)).is_err());
    }

    #[test]
    fn pairwise_identical_points() {
        let p = SpatialPoint::new(10.0, 10.0);
        let m = pairwise_distances(&[p, p], Metric::Geodesic).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn pairwise_345_triangle() {
        let pts = [SpatialPoint::new(0.0, 0.0), SpatialPoint::new(3.0, 4.0)];
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        assert_eq!(m.get(0, 1), 5.0);
    }

    #[test]
    fn pairwise_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<SpatialPoint> = (0..5)
            .map(|_| SpatialPoint::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
            .collect();
        let m = pairwise_distances(&pts, Metric::Geodesic).unwrap();
        for i in 0..5 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..5 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn percentile_constant_entries() {
        let pts = [
            SpatialPoint::new(0.0, 0.0),
            SpatialPoint::new(1.0, 0.0),
            SpatialPoint::new(0.5, 0.75f64.sqrt()),
        ];
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        for p in [1.0, 20.0, 50.0, 99.0, 100.0] {
            assert!((distance_percentile(&m, p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn percentile_nearest_rank() {
        // 5 collinear points at 0,1,3,6,10 give the 10 upper-triangle
        // distances {1,2,3,4,5,6,7,9,10} plus 3 -> sorted {1,2,3,3,4,5,6,7,9,10}
        // easier: craft entries directly through a one-dimensional layout
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let pts: Vec<SpatialPoint> = xs.iter().map(|&x| SpatialPoint::new(x, 0.0)).collect();
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        // upper triangle: {1,2,3,4,1,2,3,1,2,1} sorted {1,1,1,1,2,2,2,3,3,4}
        assert_eq!(distance_percentile(&m, 20.0), 1.0); // rank ceil(2) = 2nd
        assert_eq!(distance_percentile(&m, 50.0), 2.0);
        assert_eq!(distance_percentile(&m, 100.0), 4.0);
    }

    #[test]
    fn percentile_monotone_in_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<SpatialPoint> = (0..12)
            .map(|_| SpatialPoint::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect();
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for p in 1..=100 {
            let v = distance_percentile(&m, p as f64);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn min_distance_basics() {
        let pts = [
            SpatialPoint::new(0.0, 0.0),
            SpatialPoint::new(1.0, 0.0),
            SpatialPoint::new(100.0, 0.0),
        ];
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        assert_eq!(min_distance_to_cluster(0, &[1, 2], &m).unwrap(), 1.0);
        assert_eq!(min_distance_to_cluster(0, &[0], &m).unwrap(), 0.0);
        assert!(min_distance_to_cluster(0, &[], &m).is_err());
    }

    #[test]
    fn min_distance_union_decomposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<SpatialPoint> = (0..9)
            .map(|_| SpatialPoint::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)))
            .collect();
        let m = pairwise_distances(&pts, Metric::Euclidean).unwrap();
        let s = [1, 3, 5];
        let t = [2, 7];
        let both = [1, 3, 5, 2, 7];
        let lhs = min_distance_to_cluster(0, &both, &m).unwrap();
        let rhs = min_distance_to_cluster(0, &s, &m)
            .unwrap()
            .min(min_distance_to_cluster(0, &t, &m).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn geodesic_triangle_inequality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let mk = |rng: &mut ChaCha8Rng| {
                SpatialPoint::new(rng.gen_range(-180.0..180.0), rng.gen_range(-90.0..90.0))
            };
            let (a, b, c) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            let ab = geodesic_km(&a, &b).unwrap();
            let ba = geodesic_km(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-9);
            let ac = geodesic_km(&a, &c).unwrap();
            let cb = geodesic_km(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-9);
        }
    }
}
