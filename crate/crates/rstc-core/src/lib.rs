//! Angular depth for functional data, depth-based trimmed means, robust
//! spatio-temporal clustering, evaluation metrics, and the synthetic data
//! generators and baselines used to benchmark them.
//!
//! Curves live on a shared [`TimeGrid`]; inner products and norms use the
//! composite trapezoid rule. The depth of a curve `z` within a sample is the
//! scaled expected angle between `X1 - z` and `X2 - z` over pairs of sample
//! curves; trimmed means discard the lowest-depth fraction before averaging.
//! [`rstc_cluster`] alternates trimmed-mean estimation with nearest-mean
//! reassignment under a spatial eligibility constraint.

pub mod baselines;
pub mod depth;
pub mod error;
pub mod grid;
mod linalg;
pub mod metrics;
pub mod rstc;
pub mod simgen;
pub mod smooth;
pub mod spatial;

pub use error::{Error, Result};
pub use grid::{
    inner_product, interpolate_missing, l2_distance, norm, Curve, Dataset, Partition, Sample,
    SpatialPoint, TimeGrid,
};

pub use depth::{
    angle, angular_depth, depth_vector, projection_depth_oracle, trimmed_mean, DepthReport,
    TrimmedMean,
};
pub use metrics::{adjusted_rand_index, match_clusters, standardized_rmse, ContingencyTable};
pub use rstc::{
    reassign_step, rstc_cluster, stopping_check, RSTCConfig, RSTCResult, StopCheck, StopReason,
};
pub use spatial::{
    distance_percentile, geodesic_km, min_distance_to_cluster, pairwise_distances, DistanceMatrix,
    Metric,
};

pub use baselines::{kmeans_curves, KMeansConfig};
pub use simgen::{
    bundled_sites, default_grid, eigenfunction, generate_scenario, gibbs_mrf_labels, mean_function,
    outlier_mean, parse_site_file, rule_labels, rule_labels_with_params, sample_gp_effects, Region,
    Scenario, SimConfig, SyntheticTruth,
};
pub use smooth::{bspline_fit, SplineFit};
