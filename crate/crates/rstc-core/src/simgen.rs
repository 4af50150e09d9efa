//! Synthetic spatio-temporal data generation: Markov-random-field and
//! rule-based cluster memberships, Gaussian-process curve effects with
//! exponential covariance, cluster mean functions, white noise, and
//! outlier curves.
//!
//! Every generator is a deterministic function of its seed: one ChaCha
//! stream drives a fixed draw order, so outputs are bit-identical across
//! runs and thread counts.

use crate::error::{Error, Result};
use crate::grid::{Curve, Dataset, Partition, Sample, SpatialPoint, TimeGrid};
use crate::linalg::cholesky_psd;
use crate::spatial::euclidean;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;

/// Bounding rectangle for site and outlier locations, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl Default for Region {
    fn default() -> Self {
        Self {
            lon_min: 107.0,
            lon_max: 125.0,
            lat_min: 28.0,
            lat_max: 43.0,
        }
    }
}

/// Which membership generator drives a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Potts-model Gibbs sampling over the site graph.
    Mrf,
    /// Deterministic spatial rule with random coefficients.
    Rule,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrf" => Ok(Scenario::Mrf),
            "rule" => Ok(Scenario::Rule),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected mrf or rule)"
            ))),
        }
    }
}

/// Simulation parameters. Defaults reproduce the standard two-cluster design
/// on 156 bundled sites with a 30-point unit-interval grid.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub grid: TimeGrid,
    /// MRF interaction strength.
    pub nu: f64,
    pub k: usize,
    /// Correlation range of the exponential covariance, in location units.
    pub phi: f64,
    /// Variances of the two curve random effects.
    pub sigma_gamma: (f64, f64),
    /// White-noise variance.
    pub sigma_eps: f64,
    pub scenario: Scenario,
    pub n_outliers: usize,
    pub region: Region,
    pub seed: u64,
    /// Gibbs sweeps for the MRF scenario.
    pub mrf_sweeps: usize,
    /// Explicit site coordinates; `None` uses the bundled 156 sites when
    /// `n == 156`, uniform draws over `region` otherwise.
    pub sites: Option<Vec<SpatialPoint>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 156,
            grid: default_grid(),
            nu: 0.5,
            k: 2,
            phi: 1.0,
            sigma_gamma: (7.0, 2.0),
            sigma_eps: 0.4,
            scenario: Scenario::Mrf,
            n_outliers: 0,
            region: Region::default(),
            seed: 0,
            mrf_sweeps: 100,
            sites: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.sigma_gamma.0 < 0.0 || self.sigma_gamma.1 < 0.0 || self.sigma_eps < 0.0 {
            return Err(Error::Config("variances must be >= 0".into()));
        }
        if self.phi <= 0.0 {
            return Err(Error::Config("phi must be > 0".into()));
        }
        if self.mrf_sweeps == 0 {
            return Err(Error::Config("mrf_sweeps must be >= 1".into()));
        }
        if self.region.lon_max <= self.region.lon_min
            || self.region.lat_max <= self.region.lat_min
        {
            return Err(Error::Config("empty region rectangle".into()));
        }
        if let Some(sites) = &self.sites {
            if sites.len() != self.n {
                return Err(Error::Config(format!(
                    "{} sites provided for n = {}",
                    sites.len(),
                    self.n
                )));
            }
        }
        if self.scenario == Scenario::Rule && self.k != 2 {
            return Err(Error::Config("rule scenario defines exactly 2 clusters".into()));
        }
        Ok(())
    }
}

/// The default simulation grid t = 1/30, 2/30, ..., 1.
pub fn default_grid() -> TimeGrid {
    TimeGrid::new((1..=30).map(|j| j as f64 / 30.0).collect()).unwrap()
}

/// Ground truth attached to a generated dataset. Outlier samples carry the
/// reserved label 0 in `labels` and a set flag in `outlier_flags`; clustering
/// receives them unlabeled.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub labels: Vec<usize>,
    pub true_means: BTreeMap<usize, Curve>,
    pub outlier_flags: Vec<bool>,
}

/// Cluster mean functions: mu_1(t) = 1.8 cos(pi t^2), mu_2(t) = cos(pi t).
pub fn mean_function(k: usize, t: f64) -> Result<f64> {
    use std::f64::consts::PI;
    match k {
        1 => Ok(1.8 * (PI * t * t).cos()),
        2 => Ok((PI * t).cos()),
        other => Err(Error::InvalidArgument(format!(
            "mean_function defined for clusters 1 and 2, got {other}"
        ))),
    }
}

/// Curve random-effect shapes: phi_1(t) = sqrt(2) sin(2 pi t) and
/// phi_2(t) = 3 t^2 (1 - t), the third cubic Bernstein polynomial.
pub fn eigenfunction(q: usize, t: f64) -> Result<f64> {
    use std::f64::consts::PI;
    match q {
        1 => Ok(std::f64::consts::SQRT_2 * (2.0 * PI * t).sin()),
        2 => Ok(3.0 * t * t * (1.0 - t)),
        other => Err(Error::InvalidArgument(format!(
            "eigenfunction defined for q in {{1, 2}}, got {other}"
        ))),
    }
}

/// Indices of the `k` nearest neighbours of every site by planar distance,
/// ties broken by index.
fn knn_neighbors(locations: &[SpatialPoint], k: usize) -> Vec<Vec<usize>> {
    let n = locations.len();
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(&locations[i], &locations[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            others.iter().take(k.min(n - 1)).map(|&(_, j)| j).collect()
        })
        .collect()
}

/// Potts-model Gibbs sampler over the 4-nearest-neighbour site graph.
/// Full conditional: P(z_i = k | rest) proportional to
/// exp(nu * #{j in N(i) : z_j = k}). Labels start iid uniform and `sweeps`
/// full sweeps are run in site order.
pub fn gibbs_mrf_labels(
    locations: &[SpatialPoint],
    nu: f64,
    k: usize,
    sweeps: usize,
    seed: u64,
) -> Result<Partition> {
    if sweeps == 0 {
        return Err(Error::InvalidArgument("sweeps must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gibbs_mrf_labels_rng(locations, nu, k, sweeps, &mut rng)
}

fn gibbs_mrf_labels_rng(
    locations: &[SpatialPoint],
    nu: f64,
    k: usize,
    sweeps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Partition> {
    let n = locations.len();
    let neighbors = knn_neighbors(locations, 4);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
    let mut weights = vec![0.0; k];
    for _ in 0..sweeps {
        for i in 0..n {
            let mut counts = vec![0u32; k];
            for &j in &neighbors[i] {
                counts[labels[j] - 1] += 1;
            }
            let mut total = 0.0;
            for c in 0..k {
                weights[c] = (nu * counts[c] as f64).exp();
                total += weights[c];
            }
            let u: f64 = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = k; // fallback to the last label on rounding
            for c in 0..k {
                acc += weights[c];
                if u < acc {
                    pick = c + 1;
                    break;
                }
            }
            labels[i] = pick.min(k);
        }
    }
    Partition::new(labels, k)
}

/// Rule-based two-cluster memberships: draws a1 ~ U(-1,1), a2 ~ U(-0.5,0.5),
/// beta ~ U(0.3,0.7) and thresholds the score a1*cos(2*lon) + a2*lon*lat at
/// its nearest-rank beta-quantile.
pub fn rule_labels(locations: &[SpatialPoint], seed: u64) -> Result<Partition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rule_labels_rng(locations, &mut rng)
}

fn rule_labels_rng(locations: &[SpatialPoint], rng: &mut ChaCha8Rng) -> Result<Partition> {
    let a1 = rng.gen_range(-1.0..1.0);
    let a2 = rng.gen_range(-0.5..0.5);
    let beta = rng.gen_range(0.3..0.7);
    rule_labels_with_params(locations, a1, a2, beta)
}

/// Deterministic core of [`rule_labels`] with explicit coefficients.
pub fn rule_labels_with_params(
    locations: &[SpatialPoint],
    a1: f64,
    a2: f64,
    beta: f64,
) -> Result<Partition> {
    let scores: Vec<f64> = locations
        .iter()
        .map(|p| a1 * (2.0 * p.lon).cos() + a2 * p.lon * p.lat)
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    let rank = ((beta * m as f64).ceil() as usize).clamp(1, m);
    let quantile = sorted[rank - 1];
    let labels: Vec<usize> = scores
        .iter()
        .map(|&s| if s > quantile { 2 } else { 1 })
        .collect();
    Partition::new(labels, 2)
}

/// One zero-mean Gaussian draw with covariance
/// `sigma2 * exp(-‖s_i - s_j‖ / phi)` over planar distances, through a
/// Cholesky square root. On factorization failure a diagonal jitter of 1e-8
/// is added and escalated tenfold up to 1e-4 before reporting a numeric error.
pub fn sample_gp_effects(
    locations: &[SpatialPoint],
    sigma2: f64,
    phi: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_gp_effects_rng(locations, sigma2, phi, &mut rng)
}

fn sample_gp_effects_rng(
    locations: &[SpatialPoint],
    sigma2: f64,
    phi: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if sigma2 < 0.0 || phi <= 0.0 {
        return Err(Error::InvalidArgument(
            "sample_gp_effects needs sigma2 >= 0 and phi > 0".into(),
        ));
    }
    let n = locations.len();
    // the standard-normal draws are consumed unconditionally so the stream
    // position does not depend on sigma2
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    if sigma2 == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        cov[i * n + i] = sigma2;
        for j in i + 1..n {
            let c = sigma2 * (-euclidean(&locations[i], &locations[j]) / phi).exp();
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
    }
    let mut jitter = 0.0;
    let l = loop {
        let mut jittered = cov.clone();
        if jitter > 0.0 {
            for i in 0..n {
                jittered[i * n + i] += jitter;
            }
        }
        match cholesky_psd(&jittered, n) {
            Ok(l) => break l,
            Err(_) if jitter == 0.0 => jitter = 1e-8,
            Err(_) if jitter < 1e-4 => jitter *= 10.0,
            Err(e) => {
                return Err(Error::Numeric(format!(
                    "covariance not factorizable even with jitter 1e-4: {e}"
                )))
            }
        }
    };
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..=i {
            s += l[i * n + j] * g[j];
        }
        out[i] = s;
    }
    Ok(out)
}

/// The bundled 156 site coordinates (jittered grid over the default region).
pub fn bundled_sites() -> Vec<SpatialPoint> {
    include_str!("data/sites_156.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            let lon: f64 = it.next().unwrap().parse().unwrap();
            let lat: f64 = it.next().unwrap().parse().unwrap();
            SpatialPoint::new(lon, lat)
        })
        .collect()
}

/// Parses a site file: one `lon lat` pair per line, decimal degrees.
pub fn parse_site_file(text: &str) -> Result<Vec<SpatialPoint>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let lon: f64 = it
            .next()
            .ok_or_else(|| Error::Ingest(format!("site file line {}: empty", lineno + 1)))?
            .parse()
            .map_err(|e| Error::Ingest(format!("site file line {}: {e}", lineno + 1)))?;
        let lat: f64 = it
            .next()
            .ok_or_else(|| {
                Error::Ingest(format!("site file line {}: missing latitude", lineno + 1))
            })?
            .parse()
            .map_err(|e| Error::Ingest(format!("site file line {}: {e}", lineno + 1)))?;
        out.push(SpatialPoint::new(lon, lat));
    }
    if out.is_empty() {
        return Err(Error::Ingest("site file contains no coordinates".into()));
    }
    Ok(out)
}

/// Generates one synthetic dataset plus its ground truth.
///
/// Draw order (one seeded stream): site resolution, outlier locations,
/// memberships, the two Gaussian-process effect vectors over all locations,
/// inlier curves with white noise, then outlier curves with their per-sample
/// amplitude and phase.
pub fn generate_scenario(config: &SimConfig) -> Result<(Dataset, SyntheticTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid = config.grid.clone();
    let l = grid.len();
    let t = grid.points().to_vec();

    let inlier_sites: Vec<SpatialPoint> = match &config.sites {
        Some(s) => s.clone(),
        None if config.n == 156 => bundled_sites(),
        None => (0..config.n)
            .map(|_| uniform_point(&config.region, &mut rng))
            .collect(),
    };

    let outlier_sites: Vec<SpatialPoint> = (0..config.n_outliers)
        .map(|_| uniform_point(&config.region, &mut rng))
        .collect();

    let memberships = match config.scenario {
        Scenario::Mrf => gibbs_mrf_labels_rng(
            &inlier_sites,
            config.nu,
            config.k,
            config.mrf_sweeps,
            &mut rng,
        )?,
        Scenario::Rule => rule_labels_rng(&inlier_sites, &mut rng)?,
    };

    let all_sites: Vec<SpatialPoint> = inlier_sites
        .iter()
        .chain(outlier_sites.iter())
        .copied()
        .collect();
    let gamma1 = sample_gp_effects_rng(&all_sites, config.sigma_gamma.0, config.phi, &mut rng)?;
    let gamma2 = sample_gp_effects_rng(&all_sites, config.sigma_gamma.1, config.phi, &mut rng)?;

    let eps_sd = config.sigma_eps.sqrt();
    let n_total = config.n + config.n_outliers;
    let mut samples = Vec::with_capacity(n_total);
    let mut labels = Vec::with_capacity(n_total);
    let mut flags = Vec::with_capacity(n_total);

    for i in 0..config.n {
        let z = memberships.labels()[i];
        let vals: Vec<f64> = (0..l)
            .map(|j| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                mean_function(z, t[j]).unwrap()
                    + gamma1[i] * eigenfunction(1, t[j]).unwrap()
                    + gamma2[i] * eigenfunction(2, t[j]).unwrap()
                    + eps_sd * noise
            })
            .collect();
        samples.push(Sample {
            id: format!("s{:04}", i + 1),
            location: inlier_sites[i],
            curve: Curve::new(vals)?,
        });
        labels.push(z);
        flags.push(false);
    }

    for o in 0..config.n_outliers {
        let i = config.n + o;
        let c: f64 = rng.gen_range(1.0..2.0);
        let c1: f64 = rng.gen_range(0.0..1.0);
        let vals: Vec<f64> = (0..l)
            .map(|j| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                outlier_mean(c, c1, t[j])
                    + gamma1[i] * eigenfunction(1, t[j]).unwrap()
                    + gamma2[i] * eigenfunction(2, t[j]).unwrap()
                    + eps_sd * noise
            })
            .collect();
        samples.push(Sample {
            id: format!("o{:04}", o + 1),
            location: outlier_sites[o],
            curve: Curve::new(vals)?,
        });
        labels.push(0);
        flags.push(true);
    }

    let mut true_means = BTreeMap::new();
    for k in 1..=config.k.min(2) {
        true_means.insert(
            k,
            Curve::new(t.iter().map(|&tj| mean_function(k, tj).unwrap()).collect())?,
        );
    }

    let dataset = Dataset::new(grid, samples)?;
    Ok((
        dataset,
        SyntheticTruth {
            labels,
            true_means,
            outlier_flags: flags,
        },
    ))
}

/// The outlier mean curve `3 c exp{cos(pi (t - c1))}`.
pub fn outlier_mean(c: f64, c1: f64, t: f64) -> f64 {
    3.0 * c * (std::f64::consts::PI * (t - c1)).cos().exp()
}

fn uniform_point(region: &Region, rng: &mut ChaCha8Rng) -> SpatialPoint {
    SpatialPoint::new(
        rng.gen_range(region.lon_min..region.lon_max),
        rng.gen_range(region.lat_min..region.lat_max),
    )
}
