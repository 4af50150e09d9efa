//! The robust spatio-temporal clustering loop: alternating depth-trimmed
//! mean estimation and spatially constrained nearest-mean reassignment.
//!
//! Sweeps are synchronous: every eligibility and nearest-mean test in one
//! sweep reads the previous sweep's labels and means, so the result does not
//! depend on sample order. The spatial threshold is computed once from the
//! full pairwise distance matrix before iterating.

use crate::depth::{trimmed_mean, TrimmedMean};
use crate::error::{Error, Result};
use crate::grid::{l2_distance, Curve, Dataset, Partition};
use crate::metrics::adjusted_rand_index;
use crate::spatial::{
    distance_percentile, min_distance_to_cluster, pairwise_distances, DistanceMatrix, Metric,
};
use std::collections::BTreeMap;

/// Tuning parameters for [`rstc_cluster`].
#[derive(Debug, Clone)]
pub struct RSTCConfig {
    /// Trim fraction for per-cluster means.
    pub alpha: f64,
    /// Spatial threshold as a percentile of the between-sample distance.
    pub threshold_percentile: f64,
    pub metric: Metric,
    /// Stop when consecutive partitions reach this adjusted Rand index.
    pub ari_stop: f64,
    pub max_iter: usize,
}

impl Default for RSTCConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            threshold_percentile: 2.0,
            metric: Metric::Geodesic,
            ari_stop: 0.999,
            max_iter: 100,
        }
    }
}

impl RSTCConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must be in [0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile < 100.0) {
            return Err(Error::Config(format!(
                "threshold_percentile must be in (0, 100), got {}",
                self.threshold_percentile
            )));
        }
        if !(self.ari_stop > 0.0 && self.ari_stop <= 1.0) {
            return Err(Error::Config(format!(
                "ari_stop must be in (0, 1], got {}",
                self.ari_stop
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FixedPoint,
    AriStop,
    MaxIter,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::FixedPoint => write!(f, "fixed_point"),
            StopReason::AriStop => write!(f, "ari_stop"),
            StopReason::MaxIter => write!(f, "max_iter"),
        }
    }
}

/// Outcome of one [`stopping_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCheck {
    Continue,
    FixedPoint,
    AriStop,
}

/// Full clustering result with per-iteration history.
#[derive(Debug, Clone)]
pub struct RSTCResult {
    pub final_partition: Partition,
    /// Partition after each sweep; `history.len() == iterations`.
    pub history: Vec<Partition>,
    /// Trimmed means recomputed from the final partition.
    pub means: BTreeMap<usize, TrimmedMean>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Clusters that lost all members during iteration, in drop order.
    pub dropped_clusters: Vec<usize>,
    /// The spatial threshold actually used, in metric units.
    pub threshold: f64,
    /// Set when all but one cluster was dropped.
    pub degenerate: bool,
}

/// One synchronous reassignment sweep. A sample may move to cluster `k` when
/// some current member of `k` lies strictly within `threshold`; its own
/// cluster is always eligible. Among eligible clusters the nearest trimmed
/// mean wins, ties to the smallest cluster id.
pub fn reassign_step(
    dataset: &Dataset,
    labels: &Partition,
    means: &BTreeMap<usize, TrimmedMean>,
    matrix: &DistanceMatrix,
    threshold: f64,
) -> Result<Partition> {
    let grid = dataset.grid();
    let members: BTreeMap<usize, Vec<usize>> = means
        .keys()
        .map(|&k| (k, labels.members(k)))
        .collect();
    let mut new_labels = Vec::with_capacity(labels.len());
    for (i, sample) in dataset.samples().iter().enumerate() {
        let own = labels.labels()[i];
        let mut best: Option<(f64, usize)> = None;
        for (&k, mean) in means {
            let eligible = if k == own {
                true
            } else {
                let m = &members[&k];
                !m.is_empty() && min_distance_to_cluster(i, m, matrix)? < threshold
            };
            if !eligible {
                continue;
            }
            let d = l2_distance(&sample.curve, &mean.curve, grid)?;
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, k));
            }
        }
        new_labels.push(best.map_or(own, |(_, k)| k));
    }
    Partition::new(new_labels, labels.k())
}

/// Compares consecutive partitions: identical labels are a fixed point;
/// otherwise an adjusted Rand index at or above `ari_stop` also stops.
pub fn stopping_check(prev: &Partition, next: &Partition, ari_stop: f64) -> Result<StopCheck> {
    if prev.len() != next.len() {
        return Err(Error::LengthMismatch {
            context: "stopping_check partitions",
            expected: prev.len(),
            got: next.len(),
        });
    }
    if prev.labels() == next.labels() {
        return Ok(StopCheck::FixedPoint);
    }
    if adjusted_rand_index(prev, next)? >= ari_stop {
        return Ok(StopCheck::AriStop);
    }
    Ok(StopCheck::Continue)
}

fn trimmed_means_for(
    dataset: &Dataset,
    labels: &Partition,
    live: &[usize],
    alpha: f64,
) -> Result<BTreeMap<usize, TrimmedMean>> {
    let mut means = BTreeMap::new();
    for &k in live {
        let members = labels.members(k);
        let curves: Vec<&Curve> = members
            .iter()
            .map(|&i| &dataset.samples()[i].curve)
            .collect();
        means.insert(k, trimmed_mean(&curves, dataset.grid(), alpha)?);
    }
    Ok(means)
}

/// Runs the clustering loop from `init` until a fixed point, the ARI rule, or
/// `max_iter`. Clusters that empty out are dropped permanently. Deterministic
/// given its inputs.
pub fn rstc_cluster(dataset: &Dataset, init: &Partition, config: &RSTCConfig) -> Result<RSTCResult> {
    config.validate()?;
    if init.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            context: "rstc_cluster init vs dataset",
            expected: dataset.len(),
            got: init.len(),
        });
    }
    for k in 1..=init.k() {
        if init.members(k).is_empty() {
            return Err(Error::Config(format!("initial cluster {k} is empty")));
        }
    }

    let matrix = pairwise_distances(&dataset.locations(), config.metric)?;
    let threshold = distance_percentile(&matrix, config.threshold_percentile);

    let mut live: Vec<usize> = (1..=init.k()).collect();
    let mut dropped: Vec<usize> = Vec::new();
    let mut history: Vec<Partition> = Vec::new();
    let mut current = init.clone();
    let mut stop_reason = StopReason::MaxIter;

    for _ in 0..config.max_iter {
        let means = trimmed_means_for(dataset, &current, &live, config.alpha)?;
        let next = reassign_step(dataset, &current, &means, &matrix, threshold)?;

        let newly_dropped: Vec<usize> = live
            .iter()
            .copied()
            .filter(|&k| next.members(k).is_empty())
            .collect();
        if !newly_dropped.is_empty() {
            live.retain(|k| !newly_dropped.contains(k));
            dropped.extend(newly_dropped);
        }

        let check = stopping_check(&current, &next, config.ari_stop)?;
        history.push(next.clone());
        current = next;
        match check {
            StopCheck::FixedPoint => {
                stop_reason = StopReason::FixedPoint;
                break;
            }
            StopCheck::AriStop => {
                stop_reason = StopReason::AriStop;
                break;
            }
            StopCheck::Continue => {}
        }
    }

    let means = trimmed_means_for(dataset, &current, &live, config.alpha)?;
    let degenerate = live.len() <= 1;
    Ok(RSTCResult {
        final_partition: current,
        iterations: history.len(),
        history,
        means,
        stop_reason,
        dropped_clusters: dropped,
        threshold,
        degenerate,
    })
}
