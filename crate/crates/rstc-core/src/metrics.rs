//! Evaluation metrics: adjusted Rand index, cluster matching, and the
//! standardized RMSE of estimated mean curves.

use crate::error::{Error, Result};
use crate::grid::{l2_distance, norm, Curve, Partition, TimeGrid};
use std::collections::BTreeMap;

/// Cross-tabulation of two partitions over the same samples.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    /// counts[i][j] = samples in row-cluster i and column-cluster j
    pub counts: Vec<Vec<u64>>,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn build(p1: &Partition, p2: &Partition) -> Result<Self> {
        if p1.len() != p2.len() {
            return Err(Error::LengthMismatch {
                context: "contingency table partitions",
                expected: p1.len(),
                got: p2.len(),
            });
        }
        let row_labels = p1.present_labels();
        let col_labels = p2.present_labels();
        let row_index: BTreeMap<usize, usize> =
            row_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let col_index: BTreeMap<usize, usize> =
            col_labels.iter().enumerate().map(|(j, &l)| (l, j)).collect();
        let mut counts = vec![vec![0u64; col_labels.len()]; row_labels.len()];
        for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
            counts[row_index[&a]][col_index[&b]] += 1;
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..col_labels.len())
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let total = row_sums.iter().sum();
        Ok(Self {
            counts,
            row_labels,
            col_labels,
            row_sums,
            col_sums,
            total,
        })
    }
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Relabels by order of first appearance, so that two label vectors describe
/// the same set partition iff their canonical forms are equal.
fn canonical_form(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Hubert–Arabie adjusted Rand index. Identical partitions give exactly 1
/// (including the all-one-cluster case); the degenerate `max == expected`
/// case otherwise returns 0 by convention.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            context: "adjusted_rand_index partitions",
            expected: p1.len(),
            got: p2.len(),
        });
    }
    if p1.len() < 2 {
        return Err(Error::InvalidArgument(
            "adjusted_rand_index needs n >= 2".into(),
        ));
    }
    if canonical_form(p1.labels()) == canonical_form(p2.labels()) {
        return Ok(1.0);
    }
    let table = ContingencyTable::build(p1, p2)?;
    let sum_ij: u64 = table
        .counts
        .iter()
        .flat_map(|r| r.iter())
        .map(|&c| choose2(c))
        .sum();
    let sum_a: u64 = table.row_sums.iter().map(|&c| choose2(c)).sum();
    let sum_b: u64 = table.col_sums.iter().map(|&c| choose2(c)).sum();
    let n2 = choose2(table.total);
    let expected = sum_a as f64 * sum_b as f64 / n2 as f64;
    let max_index = (sum_a + sum_b) as f64 / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        // same-labels case handled above; anything else degenerate is 0
        return Ok(0.0);
    }
    Ok((sum_ij as f64 - expected) / denom)
}

/// Maps estimated cluster ids to truth cluster ids, maximizing total
/// agreement. Exhaustive over permutations when both sides have at most 8
/// clusters, greedy on the contingency table otherwise. Deterministic:
/// ties resolve to the lexicographically smallest assignment.
pub fn match_clusters(estimated: &Partition, truth: &Partition) -> Result<BTreeMap<usize, usize>> {
    let table = ContingencyTable::build(estimated, truth)?;
    let ne = table.row_labels.len();
    let nt = table.col_labels.len();
    let side = ne.max(nt);

    let assignment: Vec<Option<usize>> = if side <= 8 {
        // pad to a square matrix of counts; phantom rows/cols count zero
        let count = |i: usize, j: usize| -> u64 {
            if i < ne && j < nt {
                table.counts[i][j]
            } else {
                0
            }
        };
        let mut best: Option<(u64, Vec<usize>)> = None;
        let mut perm: Vec<usize> = (0..side).collect();
        permute(&mut perm, 0, &mut |p: &[usize]| {
            let score: u64 = (0..side).map(|i| count(i, p[i])).sum();
            let better = match &best {
                None => true,
                Some((s, _)) => score > *s,
            };
            if better {
                best = Some((score, p.to_vec()));
            }
        });
        let (_, p) = best.unwrap();
        (0..ne)
            .map(|i| if p[i] < nt { Some(p[i]) } else { None })
            .collect()
    } else {
        // greedy: repeatedly take the largest remaining cell
        let mut used_rows = vec![false; ne];
        let mut used_cols = vec![false; nt];
        let mut out = vec![None; ne];
        for _ in 0..ne.min(nt) {
            let mut best: Option<(u64, usize, usize)> = None;
            for i in 0..ne {
                if used_rows[i] {
                    continue;
                }
                for j in 0..nt {
                    if used_cols[j] {
                        continue;
                    }
                    let c = table.counts[i][j];
                    if best.map_or(true, |(bc, _, _)| c > bc) {
                        best = Some((c, i, j));
                    }
                }
            }
            if let Some((_, i, j)) = best {
                used_rows[i] = true;
                used_cols[j] = true;
                out[i] = Some(j);
            }
        }
        out
    };

    let mut map = BTreeMap::new();
    for (i, a) in assignment.iter().enumerate() {
        if let Some(j) = a {
            map.insert(table.row_labels[i], table.col_labels[*j]);
        }
    }
    Ok(map)
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    // generates permutations in lexicographic-ish order with the first
    // completed permutation being the identity, so ties prefer smaller ids
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Relative L2 error `‖true - est‖ / ‖true‖` of an estimated mean curve.
pub fn standardized_rmse(true_mean: &Curve, est_mean: &Curve, grid: &TimeGrid) -> Result<f64> {
    let denom = norm(true_mean, grid)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "standardized_rmse: zero-norm true mean".into(),
        ));
    }
    Ok(l2_distance(true_mean, est_mean, grid)? / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn part(labels: &[usize], k: usize) -> Partition {
        Partition::new(labels.to_vec(), k).unwrap()
    }

    #[test]
    fn ari_identical_is_one() {
        let p = part(&[1, 1, 2, 3, 2], 3);
        assert_eq!(adjusted_rand_index(&p, &p).unwrap(), 1.0);
        let q = part(&[1, 1, 1], 1);
        assert_eq!(adjusted_rand_index(&q, &q).unwrap(), 1.0);
    }

    #[test]
    fn ari_label_permutation_invariant() {
        let p = part(&[1, 1, 2, 2], 2);
        let q = part(&[2, 2, 1, 1], 2);
        assert_eq!(adjusted_rand_index(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn ari_hand_case_is_zero() {
        let p = part(&[1, 1, 1, 2], 2);
        let q = part(&[1, 1, 2, 2], 2);
        assert_eq!(adjusted_rand_index(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn ari_length_mismatch_errors() {
        let p = part(&[1, 2], 2);
        let q = part(&[1, 2, 1], 2);
        assert!(adjusted_rand_index(&p, &q).is_err());
    }

    #[test]
    fn ari_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let a: Vec<usize> = (0..30).map(|_| rng.gen_range(1..=4)).collect();
            let b: Vec<usize> = (0..30).map(|_| rng.gen_range(1..=3)).collect();
            let (pa, pb) = (part(&a, 4), part(&b, 3));
            let ab = adjusted_rand_index(&pa, &pb).unwrap();
            let ba = adjusted_rand_index(&pb, &pa).unwrap();
            assert!((ab - ba).abs() < 1e-15);
        }
    }

    #[test]
    fn ari_random_partitions_mean_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let fixed: Vec<usize> = (0..100).map(|_| rng.gen_range(1..=3)).collect();
        let pf = part(&fixed, 3);
        let mut acc = 0.0;
        for _ in 0..1000 {
            let other: Vec<usize> = (0..100).map(|_| rng.gen_range(1..=3)).collect();
            acc += adjusted_rand_index(&pf, &part(&other, 3)).unwrap();
        }
        let mean = acc / 1000.0;
        assert!(mean.abs() <= 0.02, "mean ARI {mean}");
    }

    // Independent pair-counting oracle: classifies every unordered sample
    // pair as together/apart in each partition and applies the adjusted
    // index to the pair counts.
    pub(super) fn ari_pair_counting(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let mut n11 = 0u64; // together in both
        let mut n10 = 0u64; // together in a only
        let mut n01 = 0u64;
        let mut n00 = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                let sa = a[i] == a[j];
                let sb = b[i] == b[j];
                match (sa, sb) {
                    (true, true) => n11 += 1,
                    (true, false) => n10 += 1,
                    (false, true) => n01 += 1,
                    (false, false) => n00 += 1,
                }
            }
        }
        let total = (n11 + n10 + n01 + n00) as f64;
        let sum_a = (n11 + n10) as f64;
        let sum_b = (n11 + n01) as f64;
        let expected = sum_a * sum_b / total;
        let max_index = (sum_a + sum_b) / 2.0;
        if max_index == expected {
            if a == b || (n10 == 0 && n01 == 0) {
                return 1.0;
            }
            return 0.0;
        }
        (n11 as f64 - expected) / (max_index - expected)
    }

    #[test]
    fn ari_matches_pair_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let k1 = rng.gen_range(1..=5usize);
            let k2 = rng.gen_range(1..=5usize);
            let a: Vec<usize> = (0..50).map(|_| rng.gen_range(1..=k1)).collect();
            let b: Vec<usize> = (0..50).map(|_| rng.gen_range(1..=k2)).collect();
            let got = adjusted_rand_index(&part(&a, k1), &part(&b, k2)).unwrap();
            let expect = ari_pair_counting(&a, &b);
            assert!(
                (got - expect).abs() <= 1e-12,
                "got {got}, oracle {expect}"
            );
        }
    }

    #[test]
    fn match_identity_and_swap() {
        let p = part(&[1, 1, 2, 2, 2], 2);
        let m = match_clusters(&p, &p).unwrap();
        assert_eq!(m[&1], 1);
        assert_eq!(m[&2], 2);

        let swapped = part(&[2, 2, 1, 1, 1], 2);
        let m = match_clusters(&swapped, &p).unwrap();
        assert_eq!(m[&1], 2);
        assert_eq!(m[&2], 1);
    }

    #[test]
    fn match_one_misassigned() {
        // brute force over both permutations says the 5/6 agreement wins
        let est = part(&[1, 1, 1, 2, 2, 2], 2);
        let tru = part(&[1, 1, 1, 1, 2, 2], 2);
        let m = match_clusters(&est, &tru).unwrap();
        assert_eq!(m[&1], 1);
        assert_eq!(m[&2], 2);
    }

    #[test]
    fn match_roundtrip_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<usize> = (0..40).map(|_| rng.gen_range(1..=4)).collect();
        let b: Vec<usize> = (0..40).map(|_| rng.gen_range(1..=4)).collect();
        let (pa, pb) = (part(&a, 4), part(&b, 4));
        let fwd = match_clusters(&pa, &pb).unwrap();
        let bwd = match_clusters(&pb, &pa).unwrap();
        // the forward map composed with the backward map fixes matched ids
        for (ea, ta) in &fwd {
            if let Some(back) = bwd.get(ta) {
                assert_eq!(back, ea);
            }
        }
    }

    #[test]
    fn match_greedy_path_for_many_clusters() {
        let labels: Vec<usize> = (1..=10).flat_map(|k| std::iter::repeat(k).take(4)).collect();
        let p = part(&labels, 10);
        let m = match_clusters(&p, &p).unwrap();
        for k in 1..=10 {
            assert_eq!(m[&k], k);
        }
    }

    #[test]
    fn srmse_basics() {
        let g = TimeGrid::uniform(0.0, 1.0, 201).unwrap();
        let s = Curve::from_fn(&g, |t| (2.0 * std::f64::consts::PI * t).sin());
        assert_eq!(standardized_rmse(&s, &s, &g).unwrap(), 0.0);
        let zero = Curve::constant(0.0, 201);
        assert!((standardized_rmse(&s, &zero, &g).unwrap() - 1.0).abs() < 1e-12);
        let scaled = s.scale(1.5);
        let got = standardized_rmse(&s, &scaled, &g).unwrap();
        assert!((got - 0.5).abs() < 1e-3, "got {got}");
        assert!(standardized_rmse(&zero, &s, &g).is_err());
    }

    #[test]
    fn srmse_scaling_law() {
        let g = TimeGrid::uniform(0.0, 1.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let c: f64 = rng.gen_range(-3.0..3.0);
            let m = Curve::new((0..64).map(|_| rng.gen_range(0.5..5.0)).collect()).unwrap();
            let got = standardized_rmse(&m, &m.scale(c), &g).unwrap();
            assert!(
                (got - (1.0 - c).abs()).abs() <= 1e-10,
                "c={c} got {got}"
            );
        }
    }
}
