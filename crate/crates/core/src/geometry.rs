//! Point clouds, unit-ball normalization, z-rotation and the corruption
//! generators used by the robustness experiments.
//!
//! All generators are pure functions of `(cloud, parameters, seed)`.

use alloc::vec::Vec;
use num_traits::Float;
use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    label: Option<usize>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(PointCloud { points, label: None })
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    fn replace_points(&self, points: Vec<Point>) -> Self {
        PointCloud { points, label: self.label }
    }

    pub fn centroid(&self) -> Point {
        let mut c = [0.0; 3];
        for p in &self.points {
            for a in 0..3 {
                c[a] += p[a];
            }
        }
        let n = self.points.len() as f64;
        c.map(|v| v / n)
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(0.0, f64::max)
    }
}

pub fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Centers the cloud on its centroid and scales it so the farthest point sits
/// on the unit sphere.
pub fn normalize_unit_ball(pc: &PointCloud) -> Result<PointCloud> {
    let c = pc.centroid();
    let centered: Vec<Point> = pc
        .points
        .iter()
        .map(|p| [p[0] - c[0], p[1] - c[1], p[2] - c[2]])
        .collect();
    let r = centered.iter().map(norm).fold(0.0, f64::max);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DegenerateCloud);
    }
    let s = 1.0 / r;
    Ok(pc.replace_points(centered.into_iter().map(|p| p.map(|v| v * s)).collect()))
}

pub fn rotate_z(pc: &PointCloud, angle: f64) -> PointCloud {
    let (s, c) = angle.sin_cos();
    pc.replace_points(
        pc.points
            .iter()
            .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]])
            .collect(),
    )
}

pub fn add_gaussian_noise(pc: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid("noise sigma must be finite and >= 0"));
    }
    if sigma == 0.0 {
        return Ok(pc.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| invalid("noise sigma"))?;
    let mut rng = rng::stream(seed, &[tag::NOISE]);
    Ok(pc.replace_points(
        pc.points
            .iter()
            .map(|p| p.map(|v| v + normal.sample(&mut rng)))
            .collect(),
    ))
}

fn check_fraction(fraction: f64, upper_inclusive: bool) -> Result<()> {
    let ok = fraction >= 0.0 && if upper_inclusive { fraction <= 1.0 } else { fraction < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(invalid("fraction outside its allowed range"))
    }
}

fn uniform_cube_point(rng: &mut rng::Rng) -> Point {
    [
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    ]
}

/// Replaces `round(fraction * N)` randomly chosen points by points drawn
/// uniformly from the cube `[-1, 1]^3`. The point count is unchanged.
pub fn add_uniform_outliers(pc: &PointCloud, fraction: f64, seed: u64) -> Result<PointCloud> {
    check_fraction(fraction, true)?;
    let n = pc.len();
    let count = (fraction * n as f64).round() as usize;
    if count == 0 {
        return Ok(pc.clone());
    }
    let mut rng = rng::stream(seed, &[tag::OUTLIERS]);
    let mut points = pc.points.clone();
    for i in index::sample(&mut rng, n, count.min(n)).into_iter() {
        points[i] = uniform_cube_point(&mut rng);
    }
    Ok(pc.replace_points(points))
}

/// Replaces whole clusters of `cluster_size` points. There are
/// `floor(fraction * N / cluster_size)` clusters with centers uniform in the
/// cube; members are normal around the center with std `cluster_sigma`.
pub fn add_clustered_outliers(
    pc: &PointCloud,
    fraction: f64,
    cluster_size: usize,
    cluster_sigma: f64,
    seed: u64,
) -> Result<PointCloud> {
    check_fraction(fraction, true)?;
    if cluster_size == 0 {
        return Err(invalid("cluster size must be >= 1"));
    }
    if !(cluster_sigma >= 0.0) || !cluster_sigma.is_finite() {
        return Err(invalid("cluster sigma must be finite and >= 0"));
    }
    let n = pc.len();
    let budget = fraction * n as f64;
    if cluster_size as f64 > budget {
        return Err(Error::NoFullCluster { cluster_size, budget });
    }
    let clusters = (budget / cluster_size as f64).floor() as usize;
    let replaced = clusters * cluster_size;
    let mut rng = rng::stream(seed, &[tag::CLUSTERS]);
    let normal = Normal::new(0.0, cluster_sigma).map_err(|_| invalid("cluster sigma"))?;
    let targets = index::sample(&mut rng, n, replaced).into_vec();
    let mut points = pc.points.clone();
    for members in targets.chunks(cluster_size) {
        let center = uniform_cube_point(&mut rng);
        for &i in members {
            points[i] = if cluster_sigma == 0.0 {
                center
            } else {
                center.map(|c| c + normal.sample(&mut rng))
            };
        }
    }
    Ok(pc.replace_points(points))
}

/// Removes `round(fraction * N)` points chosen uniformly at random; the
/// survivors keep their original order.
pub fn random_dropout(pc: &PointCloud, fraction: f64, seed: u64) -> Result<PointCloud> {
    check_fraction(fraction, false)?;
    let n = pc.len();
    let removed = (fraction * n as f64).round() as usize;
    if removed == 0 {
        return Ok(pc.clone());
    }
    if removed >= n {
        return Err(Error::EmptyCloud);
    }
    let mut rng = rng::stream(seed, &[tag::DROPOUT]);
    let mut keep = alloc::vec![true; n];
    for i in index::sample(&mut rng, n, removed).into_iter() {
        keep[i] = false;
    }
    let points = pc
        .points
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    Ok(pc.replace_points(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentationKind {
    None,
    GaussianNoise,
    UniformOutliers,
    ClusteredOutliers,
    Dropout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationConfig {
    pub kind: AugmentationKind,
    /// Noise std, or the per-cluster std for clustered outliers.
    pub sigma: f64,
    pub fraction: f64,
    pub cluster_size: usize,
    pub seed: u64,
}

impl AugmentationConfig {
    pub fn none() -> Self {
        AugmentationConfig {
            kind: AugmentationKind::None,
            sigma: 0.0,
            fraction: 0.0,
            cluster_size: 1,
            seed: 0,
        }
    }

    pub fn noise(sigma: f64, seed: u64) -> Self {
        AugmentationConfig { kind: AugmentationKind::GaussianNoise, sigma, seed, ..Self::none() }
    }

    pub fn uniform_outliers(fraction: f64, seed: u64) -> Self {
        AugmentationConfig { kind: AugmentationKind::UniformOutliers, fraction, seed, ..Self::none() }
    }

    pub fn clustered_outliers(fraction: f64, cluster_size: usize, sigma: f64, seed: u64) -> Self {
        AugmentationConfig {
            kind: AugmentationKind::ClusteredOutliers,
            sigma,
            fraction,
            cluster_size,
            seed,
        }
    }

    pub fn dropout(fraction: f64, seed: u64) -> Self {
        AugmentationConfig { kind: AugmentationKind::Dropout, fraction, seed, ..Self::none() }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        AugmentationConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(invalid("fraction must lie in [0, 1]"));
        }
        if !(self.sigma >= 0.0) {
            return Err(invalid("sigma must be >= 0"));
        }
        if self.cluster_size == 0 {
            return Err(invalid("cluster size must be >= 1"));
        }
        Ok(())
    }

    /// True when `apply` returns its input unchanged.
    pub fn is_identity(&self) -> bool {
        match self.kind {
            AugmentationKind::None => true,
            AugmentationKind::GaussianNoise => self.sigma == 0.0,
            AugmentationKind::UniformOutliers | AugmentationKind::Dropout => self.fraction == 0.0,
            AugmentationKind::ClusteredOutliers => false,
        }
    }

    pub fn apply(&self, pc: &PointCloud) -> Result<PointCloud> {
        self.validate()?;
        match self.kind {
            AugmentationKind::None => Ok(pc.clone()),
            AugmentationKind::GaussianNoise => add_gaussian_noise(pc, self.sigma, self.seed),
            AugmentationKind::UniformOutliers => add_uniform_outliers(pc, self.fraction, self.seed),
            AugmentationKind::ClusteredOutliers => {
                add_clustered_outliers(pc, self.fraction, self.cluster_size, self.sigma, self.seed)
            }
            AugmentationKind::Dropout => random_dropout(pc, self.fraction, self.seed),
        }
    }
}

/// How a corrupted cloud is brought back inside the unit ball before
/// voxelization.
///
/// `Crop` is the default. Outliers drawn from the cube `[-1, 1]^3` reach
/// radius `sqrt(3)`, and rescaling those into the ball shrinks and shifts the
/// object itself, which wipes out the occupancy pattern the classifier learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BallFit {
    /// Re-run [`normalize_unit_ball`]: recenter and rescale to radius 1.
    Renormalize,
    /// Discard points whose radius exceeds 1; no rescaling.
    #[default]
    Crop,
}

impl BallFit {
    pub fn name(self) -> &'static str {
        match self {
            BallFit::Renormalize => "renormalize",
            BallFit::Crop => "crop",
        }
    }
}

pub fn fit_to_unit_ball(pc: &PointCloud, policy: BallFit) -> Result<PointCloud> {
    match policy {
        BallFit::Renormalize => normalize_unit_ball(pc),
        BallFit::Crop => {
            let kept: Vec<Point> = pc.points.iter().copied().filter(|p| norm(p) <= 1.0).collect();
            if kept.is_empty() {
                return Err(Error::EmptyCloud);
            }
            Ok(pc.replace_points(kept))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn cube_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = rng::from_seed(seed);
        PointCloud::new((0..n).map(|_| uniform_cube_point(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let pc = PointCloud::new(alloc::vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(normalize_unit_ball(&pc).unwrap(), pc);
        let pc = PointCloud::new(alloc::vec![[2.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let out = normalize_unit_ball(&pc).unwrap();
        assert_eq!(out.points(), &[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
    }

    #[test]
    fn normalize_random_cloud_has_unit_radius() {
        let out = normalize_unit_ball(&cube_cloud(2048, 3)).unwrap();
        assert!((out.max_radius() - 1.0).abs() < 1e-12);
        let again = normalize_unit_ball(&out).unwrap();
        for (a, b) in out.points().iter().zip(again.points()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_and_empty_clouds() {
        let pc = PointCloud::new(alloc::vec![[0.3, 0.3, 0.3]; 4]).unwrap();
        assert_eq!(normalize_unit_ball(&pc), Err(Error::DegenerateCloud));
        assert_eq!(PointCloud::new(Vec::new()), Err(Error::EmptyCloud));
    }

    #[test]
    fn rotate_examples() {
        let pc = PointCloud::new(alloc::vec![[1.0, 0.0, 0.0]]).unwrap();
        let r = rotate_z(&pc, PI / 2.0);
        let p = r.points()[0];
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15 && p[2] == 0.0);
        let pc = cube_cloud(64, 1);
        assert_eq!(rotate_z(&pc, 0.0), pc);
        for (a, b) in rotate_z(&pc, 2.0 * PI).points().iter().zip(pc.points()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noise_statistics_and_determinism() {
        let pc = cube_cloud(2048, 5);
        assert_eq!(add_gaussian_noise(&pc, 0.0, 1).unwrap(), pc);
        let a = add_gaussian_noise(&pc, 0.1, 42).unwrap();
        let b = add_gaussian_noise(&pc, 0.1, 42).unwrap();
        assert_eq!(a, b);
        for axis in 0..3 {
            let d: Vec<f64> =
                a.points().iter().zip(pc.points()).map(|(x, y)| x[axis] - y[axis]).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (d.len() - 1) as f64;
            assert!((var - 0.01).abs() < 0.001, "axis {axis} variance {var}");
        }
        assert!(add_gaussian_noise(&pc, -1.0, 1).is_err());
    }

    #[test]
    fn uniform_outlier_counts() {
        let pc = normalize_unit_ball(&cube_cloud(2048, 9)).unwrap();
        assert_eq!(add_uniform_outliers(&pc, 0.0, 1).unwrap(), pc);
        let out = add_uniform_outliers(&pc, 0.5, 1).unwrap();
        assert_eq!(out.len(), 2048);
        let changed = out.points().iter().zip(pc.points()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 1024);
        let all = add_uniform_outliers(&pc, 1.0, 2).unwrap();
        for axis in 0..3 {
            let mean = all.points().iter().map(|p| p[axis]).sum::<f64>() / 2048.0;
            assert!(mean.abs() < 0.05);
            assert!(all.points().iter().all(|p| p[axis].abs() <= 1.0));
        }
        assert!(add_uniform_outliers(&pc, 1.5, 1).is_err());
    }

    #[test]
    fn clustered_outlier_counts() {
        let pc = cube_cloud(2048, 11);
        let out = add_clustered_outliers(&pc, 0.10, 10, 0.04, 3).unwrap();
        let changed = out.points().iter().zip(pc.points()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 200);
        assert_eq!(out.len(), 2048);
        let out = add_clustered_outliers(&pc, 0.20, 20, 0.04, 3).unwrap();
        let changed = out.points().iter().zip(pc.points()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 400);

        let out = add_clustered_outliers(&pc, 0.10, 10, 0.0, 3).unwrap();
        let mut centers: Vec<Point> =
            out.points().iter().zip(pc.points()).filter(|(a, b)| a != b).map(|(a, _)| *a).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        centers.dedup();
        assert_eq!(centers.len(), 20);

        let small = cube_cloud(50, 1);
        assert!(matches!(
            add_clustered_outliers(&small, 0.1, 10, 0.04, 1),
            Err(Error::NoFullCluster { .. })
        ));
    }

    #[test]
    fn dropout_counts() {
        let pc = cube_cloud(2048, 13);
        assert_eq!(random_dropout(&pc, 0.0, 1).unwrap(), pc);
        assert_eq!(random_dropout(&pc, 0.5, 1).unwrap().len(), 1024);
        assert_eq!(random_dropout(&pc, 0.9, 1).unwrap().len(), 205);
        assert!(random_dropout(&pc, 1.0, 1).is_err());
        let one = PointCloud::new(alloc::vec![[0.1, 0.0, 0.0]; 2]).unwrap();
        assert_eq!(random_dropout(&one, 0.75, 1), Err(Error::EmptyCloud));
    }

    #[test]
    fn crop_drops_only_outside_points() {
        let pc = PointCloud::new(alloc::vec![[0.5, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
            .unwrap();
        let out = fit_to_unit_ball(&pc, BallFit::Crop).unwrap();
        assert_eq!(out.points(), &[[0.5, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn rotation_preserves_axis_distance_and_height(
            pts in proptest::collection::vec(proptest::array::uniform3(-1.0f64..1.0), 1..40),
            angle in -10.0f64..10.0,
        ) {
            let pc = PointCloud::new(pts).unwrap();
            let r = rotate_z(&pc, angle);
            for (a, b) in r.points().iter().zip(pc.points()) {
                prop_assert_eq!(a[2], b[2]);
                let ra = (a[0] * a[0] + a[1] * a[1]).sqrt();
                let rb = (b[0] * b[0] + b[1] * b[1]).sqrt();
                prop_assert!((ra - rb).abs() <= 1e-14);
            }
        }

        #[test]
        fn augmentations_are_deterministic(seed in any::<u64>(), fraction in 0.0f64..0.9) {
            let pc = cube_cloud(200, 17);
            for cfg in [
                AugmentationConfig::noise(0.05, seed),
                AugmentationConfig::uniform_outliers(fraction, seed),
                AugmentationConfig::dropout(fraction, seed),
            ] {
                prop_assert_eq!(cfg.apply(&pc).unwrap(), cfg.apply(&pc).unwrap());
            }
            let n = pc.len();
            let d = AugmentationConfig::dropout(fraction, seed).apply(&pc).unwrap();
            prop_assert_eq!(d.len(), n - (fraction * n as f64).round() as usize);
            prop_assert_eq!(AugmentationConfig::uniform_outliers(fraction, seed).apply(&pc).unwrap().len(), n);
        }
    }
}
