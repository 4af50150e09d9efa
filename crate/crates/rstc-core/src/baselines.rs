//! The k-means baseline: Lloyd iterations on curves as plain vectors of grid
//! values, distance-proportional probabilistic seeding, best of several
//! restarts by final objective.

use crate::error::{Error, Result};
use crate::grid::{Dataset, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 2,
            restarts: 10,
            max_iter: 300,
            seed: 0,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance-proportional (k-means++ style) seeding: the first centroid is
/// uniform, later ones drawn with probability proportional to the squared
/// distance to the nearest chosen centroid.
fn seed_centroids(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    centroids.push(points[first].to_vec());
    chosen[first] = true;
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if target < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all remaining points coincide with a centroid
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[idx] = true;
        centroids.push(points[idx].to_vec());
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

fn lloyd(
    points: &[&[f64]],
    mut centroids: Vec<Vec<f64>>,
    max_iter: usize,
) -> (Vec<usize>, f64) {
    let n = points.len();
    let k = centroids.len();
    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for (c, cent) in centroids.iter().enumerate() {
                let d = sq_dist(p, cent);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if labels[i] != best.1 {
                labels[i] = best.1;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(*p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            }
            // empty clusters keep their previous centroid
        }
        if !changed {
            break;
        }
    }
    let objective: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| sq_dist(p, &centroids[labels[i]]))
        .sum();
    (labels, objective)
}

/// Runs k-means over the dataset's curves; deterministic given the seed.
pub fn kmeans_curves(dataset: &Dataset, config: &KMeansConfig) -> Result<Partition> {
    let n = dataset.len();
    if config.k == 0 || config.restarts == 0 {
        return Err(Error::Config("k and restarts must be >= 1".into()));
    }
    if n < config.k {
        return Err(Error::Config(format!(
            "{} samples cannot form {} clusters",
            n, config.k
        )));
    }
    let points: Vec<&[f64]> = dataset.samples().iter().map(|s| s.curve.values()).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..config.restarts {
        let restart_seed = config
            .seed
            .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
        let centroids = seed_centroids(&points, config.k, &mut rng);
        let (labels, objective) = lloyd(&points, centroids, config.max_iter);
        if best.as_ref().map_or(true, |(b, _)| objective < *b) {
            best = Some((objective, labels));
        }
    }
    let (_, labels) = best.unwrap();
    Partition::new(labels.iter().map(|&c| c + 1).collect(), config.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Curve, Sample, SpatialPoint, TimeGrid};
    use crate::metrics::adjusted_rand_index;
    use rand::Rng;

    fn dataset_from_levels(levels: &[f64]) -> Dataset {
        let grid = TimeGrid::uniform(0.0, 1.0, 6).unwrap();
        let samples = levels
            .iter()
            .enumerate()
            .map(|(i, &v)| Sample {
                id: format!("s{i}"),
                location: SpatialPoint::new(i as f64, 0.0),
                curve: Curve::constant(v, 6),
            })
            .collect();
        Dataset::new(grid, samples).unwrap()
    }

    #[test]
    fn k_one_puts_everything_together() {
        let data = dataset_from_levels(&[0.0, 1.0, 5.0, 9.0]);
        let part = kmeans_curves(
            &data,
            &KMeansConfig {
                k: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(part.labels().iter().all(|&z| z == 1));
    }

    #[test]
    fn separates_two_constant_groups() {
        let data = dataset_from_levels(&[0.0, 0.1, -0.1, 100.0, 100.1, 99.9]);
        let part = kmeans_curves(&data, &KMeansConfig::default()).unwrap();
        let truth = Partition::new(vec![1, 1, 1, 2, 2, 2], 2).unwrap();
        assert_eq!(adjusted_rand_index(&part, &truth).unwrap(), 1.0);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let data = dataset_from_levels(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let part = kmeans_curves(
            &data,
            &KMeansConfig {
                k: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let mut seen = part.labels().to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 5, "each sample should sit alone");
    }

    #[test]
    fn rejects_more_clusters_than_samples() {
        let data = dataset_from_levels(&[0.0, 1.0]);
        assert!(kmeans_curves(
            &data,
            &KMeansConfig {
                k: 3,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let data = dataset_from_levels(&[0.0, 0.4, 2.1, 5.0, 5.2, 7.7, 9.0]);
        let cfg = KMeansConfig {
            k: 3,
            seed: 88,
            ..Default::default()
        };
        let a = kmeans_curves(&data, &cfg).unwrap();
        let b = kmeans_curves(&data, &cfg).unwrap();
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn objective_non_increasing_over_lloyd_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let points_data: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let points: Vec<&[f64]> = points_data.iter().map(|v| v.as_slice()).collect();
        let mut rng2 = ChaCha8Rng::seed_from_u64(14);
        let centroids = seed_centroids(&points, 4, &mut rng2);
        // run Lloyd one iteration at a time and watch the objective
        let mut prev_obj = f64::INFINITY;
        let mut current = centroids;
        for _ in 0..10 {
            let (labels, obj) = lloyd(&points, current.clone(), 1);
            assert!(obj <= prev_obj + 1e-9, "objective rose: {prev_obj} -> {obj}");
            prev_obj = obj;
            // rebuild centroids from labels for the next manual step
            let dim = points[0].len();
            let mut sums = vec![vec![0.0; dim]; 4];
            let mut counts = vec![0usize; 4];
            for (i, p) in points.iter().enumerate() {
                counts[labels[i]] += 1;
                for (s, v) in sums[labels[i]].iter_mut().zip(*p) {
                    *s += v;
                }
            }
            for c in 0..4 {
                if counts[c] > 0 {
                    for s in sums[c].iter_mut() {
                        *s /= counts[c] as f64;
                    }
                    current[c] = sums[c].clone();
                }
            }
        }
    }

    #[test]
    fn stable_under_sample_reordering() {
        let levels = [0.0, 0.2, 0.1, 10.0, 10.2, 10.1, 20.0, 20.3, 19.9];
        let data = dataset_from_levels(&levels);
        let mut reversed = levels;
        reversed.reverse();
        let data_rev = dataset_from_levels(&reversed);
        let cfg = KMeansConfig {
            k: 3,
            seed: 5,
            ..Default::default()
        };
        let a = kmeans_curves(&data, &cfg).unwrap();
        let b = kmeans_curves(&data_rev, &cfg).unwrap();
        // compare b against a with the order undone
        let b_undone: Vec<usize> = b.labels().iter().rev().copied().collect();
        let pa = a;
        let pb = Partition::new(b_undone, 3).unwrap();
        assert_eq!(adjusted_rand_index(&pa, &pb).unwrap(), 1.0);
    }
}
