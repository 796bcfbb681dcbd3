//! Labeled point-cloud corpora and the procedural primitive generator.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::geometry::{normalize_unit_ball, rotate_z, Point, PointCloud};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cloud: PointCloud,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<Sample>,
    pub class_names: Vec<String>,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Sample>, class_names: Vec<String>, split: Split) -> Result<Self> {
        if let Some(s) = samples.iter().find(|s| s.label >= class_names.len()) {
            return Err(invalid(alloc::format!(
                "label {} outside {} classes",
                s.label,
                class_names.len()
            )));
        }
        Ok(LabeledDataset { samples, class_names, split })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.class_names.len()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Content hash over class names, labels and the exact point coordinates.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for name in &self.class_names {
            h.update(name.as_bytes());
            h.update([0u8]);
        }
        for s in &self.samples {
            h.update((s.label as u64).to_le_bytes());
            h.update((s.cloud.len() as u64).to_le_bytes());
            for p in s.cloud.points() {
                for v in p {
                    h.update(v.to_le_bytes());
                }
            }
        }
        hex16(&h.finalize())
    }
}

pub(crate) fn hex16(digest: &[u8]) -> String {
    use core::fmt::Write;
    let mut s = String::with_capacity(16);
    for b in &digest[..8] {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Sphere,
    Cube,
    Cylinder,
    Cone,
    Torus,
    Pyramid,
    Ellipsoid,
    Capsule,
}

impl Primitive {
    pub const ALL: [Primitive; 8] = [
        Primitive::Sphere,
        Primitive::Cube,
        Primitive::Cylinder,
        Primitive::Cone,
        Primitive::Torus,
        Primitive::Pyramid,
        Primitive::Ellipsoid,
        Primitive::Capsule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Sphere => "sphere",
            Primitive::Cube => "cube",
            Primitive::Cylinder => "cylinder",
            Primitive::Cone => "cone",
            Primitive::Torus => "torus",
            Primitive::Pyramid => "pyramid",
            Primitive::Ellipsoid => "ellipsoid",
            Primitive::Capsule => "capsule",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Primitive::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    /// One area-uniform `(point, outward normal)` pair on the unscaled surface.
    fn surface_sample(self, rng: &mut rng::Rng) -> (Point, Point) {
        match self {
            Primitive::Sphere | Primitive::Ellipsoid => {
                let u = unit_normal(rng);
                (u, u)
            }
            Primitive::Cube => {
                let face = rng.random_range(0..6);
                let axis = face / 2;
                let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
                let mut p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0];
                p.swap(2, axis);
                p[axis] = sign;
                let mut n = [0.0; 3];
                n[axis] = sign;
                (p, n)
            }
            Primitive::Cylinder => {
                // Lateral area 4 pi, each cap pi.
                if rng.random_bool(2.0 / 3.0) {
                    let a = rng.random_range(0.0..2.0 * PI);
                    ([a.cos(), a.sin(), rng.random_range(-1.0..1.0)], [a.cos(), a.sin(), 0.0])
                } else {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let (x, y) = disk(rng, 1.0);
                    ([x, y, sign], [0.0, 0.0, sign])
                }
            }
            Primitive::Cone => {
                // Apex at z = 1, unit base disk at z = -1; slant length sqrt 5.
                let s5 = 5f64.sqrt();
                if rng.random_bool(s5 / (1.0 + s5)) {
                    let t = rng.random::<f64>().sqrt();
                    let a = rng.random_range(0.0..2.0 * PI);
                    (
                        [t * a.cos(), t * a.sin(), 1.0 - 2.0 * t],
                        [2.0 * a.cos() / s5, 2.0 * a.sin() / s5, 1.0 / s5],
                    )
                } else {
                    let (x, y) = disk(rng, 1.0);
                    ([x, y, -1.0], [0.0, 0.0, -1.0])
                }
            }
            Primitive::Torus => {
                let (major, minor) = (0.7, 0.3);
                loop {
                    let u = rng.random_range(0.0..2.0 * PI);
                    let v = rng.random_range(0.0..2.0 * PI);
                    if rng.random::<f64>() * (major + minor) <= major + minor * v.cos() {
                        let ring = major + minor * v.cos();
                        return (
                            [ring * u.cos(), ring * u.sin(), minor * v.sin()],
                            [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()],
                        );
                    }
                }
            }
            Primitive::Pyramid => {
                // Square base [-1,1]^2 at z = -1 (area 4), four sides of area sqrt 5.
                let s5 = 5f64.sqrt();
                if rng.random_bool(4.0 / (4.0 + 4.0 * s5)) {
                    ([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), -1.0], [0.0, 0.0, -1.0])
                } else {
                    let side = rng.random_range(0..4);
                    let corners = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
                    let b = corners[side];
                    let c = corners[(side + 1) % 4];
                    let apex = [0.0, 0.0, 1.0];
                    let b = [b[0], b[1], -1.0];
                    let c = [c[0], c[1], -1.0];
                    let r1 = rng.random::<f64>().sqrt();
                    let r2 = rng.random::<f64>();
                    let p = [0, 1, 2].map(|i| {
                        (1.0 - r1) * apex[i] + r1 * (1.0 - r2) * b[i] + r1 * r2 * c[i]
                    });
                    let mid = [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0];
                    let n = [2.0 * mid[0] / s5, 2.0 * mid[1] / s5, 1.0 / s5];
                    (p, n)
                }
            }
            Primitive::Capsule => {
                // Radius 0.5: lateral area pi equals the two caps' area pi.
                if rng.random_bool(0.5) {
                    let a = rng.random_range(0.0..2.0 * PI);
                    (
                        [0.5 * a.cos(), 0.5 * a.sin(), rng.random_range(-0.5..0.5)],
                        [a.cos(), a.sin(), 0.0],
                    )
                } else {
                    let u = unit_normal(rng);
                    let shift = if u[2] >= 0.0 { 0.5 } else { -0.5 };
                    ([0.5 * u[0], 0.5 * u[1], 0.5 * u[2] + shift], u)
                }
            }
        }
    }

    /// Fixed anisotropy baked into the base shape.
    fn base_axes(self) -> [f64; 3] {
        match self {
            Primitive::Ellipsoid => [1.0, 0.6, 0.35],
            _ => [1.0; 3],
        }
    }
}

fn unit_normal(rng: &mut rng::Rng) -> Point {
    loop {
        let v: Point = [0; 3].map(|_| StandardNormal.sample(rng));
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-12 {
            return v.map(|x| x / r);
        }
    }
}

fn disk(rng: &mut rng::Rng, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    (r * a.cos(), r * a.sin())
}

/// `count` points area-uniform on `primitive` stretched by `scale` per axis.
///
/// Base samples are accepted with probability proportional to the area
/// stretch of the linear map at that point, `det(S) |S^-1 n|`, so the
/// stretched surface is still sampled uniformly.
pub fn sample_primitive(primitive: Primitive, count: usize, scale: [f64; 3], rng: &mut rng::Rng) -> Vec<Point> {
    let axes = primitive.base_axes();
    let s = [0, 1, 2].map(|i| axes[i] * scale[i]);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (p, n) = primitive.surface_sample(rng);
        let stretch = ((n[0] / s[0]).powi(2) + (n[1] / s[1]).powi(2) + (n[2] / s[2]).powi(2)).sqrt();
        if rng.random::<f64>() <= stretch * smin {
            out.push([p[0] * s[0], p[1] * s[1], p[2] * s[2]]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveConfig {
    pub classes: Vec<Primitive>,
    pub per_class: usize,
    pub points: usize,
    pub seed: u64,
    /// Per-axis random stretch range; `(1, 1)` disables stretching.
    pub scale_range: (f64, f64),
    pub random_rotation: bool,
}

impl PrimitiveConfig {
    pub fn new(classes: Vec<Primitive>, per_class: usize, points: usize, seed: u64) -> Self {
        PrimitiveConfig { classes, per_class, points, seed, scale_range: (0.6, 1.0), random_rotation: true }
    }

    pub fn from_names(names: &[&str], per_class: usize, points: usize, seed: u64) -> Result<Self> {
        let classes = names.iter().map(|n| Primitive::from_name(n)).collect::<Result<_>>()?;
        Ok(Self::new(classes, per_class, points, seed))
    }
}

/// Generates `per_class` clouds per primitive, class-major, each stretched,
/// rotated about z and normalized to the unit ball.
pub fn generate_primitives(config: &PrimitiveConfig) -> Result<LabeledDataset> {
    if config.classes.is_empty() {
        return Err(invalid("no classes requested"));
    }
    if config.per_class == 0 {
        return Err(invalid("per_class must be >= 1"));
    }
    if config.points < 64 {
        return Err(invalid("points must be >= 64"));
    }
    let (lo, hi) = config.scale_range;
    if !(0.0 < lo && lo <= hi) {
        return Err(invalid("scale range must satisfy 0 < lo <= hi"));
    }
    let mut samples = Vec::with_capacity(config.classes.len() * config.per_class);
    for (label, &prim) in config.classes.iter().enumerate() {
        for i in 0..config.per_class {
            let mut r = rng::stream(config.seed, &[tag::GENERATE, label as u64, i as u64]);
            let scale = [0; 3].map(|_| if lo == hi { lo } else { r.random_range(lo..=hi) });
            let pts = sample_primitive(prim, config.points, scale, &mut r);
            let mut cloud = PointCloud::new(pts)?;
            if config.random_rotation {
                cloud = rotate_z(&cloud, r.random_range(0.0..2.0 * PI));
            }
            let cloud = normalize_unit_ball(&cloud)?.with_label(label);
            samples.push(Sample { cloud, label });
        }
    }
    let names = config.classes.iter().map(|p| p.name().to_string()).collect();
    LabeledDataset::new(samples, names, Split::Train)
}

/// Stratified split: `round(count * test_fraction)` samples of every class go
/// to the test side. Both halves keep the original sample order.
pub fn split(dataset: &LabeledDataset, test_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid("test fraction must lie in (0, 1)"));
    }
    let mut is_test = alloc::vec![false; dataset.len()];
    for class in 0..dataset.num_classes() {
        let mut idx: Vec<usize> =
            (0..dataset.len()).filter(|&i| dataset.samples[i].label == class).collect();
        let take = (idx.len() as f64 * test_fraction).round() as usize;
        idx.shuffle(&mut rng::stream(seed, &[tag::SPLIT, class as u64]));
        for &i in &idx[..take] {
            is_test[i] = true;
        }
    }
    let pick = |want: bool| -> Vec<Sample> {
        dataset
            .samples
            .iter()
            .zip(&is_test)
            .filter(|(_, &t)| t == want)
            .map(|(s, _)| s.clone())
            .collect()
    };
    Ok((
        LabeledDataset::new(pick(false), dataset.class_names.clone(), Split::Train)?,
        LabeledDataset::new(pick(true), dataset.class_names.clone(), Split::Test)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    #[test]
    fn unstretched_sphere_samples_lie_on_unit_sphere() {
        let mut r = rng::from_seed(1);
        let pts = sample_primitive(Primitive::Sphere, 2048, [1.0; 3], &mut r);
        assert!(pts.iter().all(|p| (norm(p) - 1.0).abs() < 1e-9));
        let mut cfg = PrimitiveConfig::new(alloc::vec![Primitive::Sphere], 2, 2048, 4);
        cfg.scale_range = (1.0, 1.0);
        let ds = generate_primitives(&cfg).unwrap();
        for s in &ds.samples {
            assert!((s.cloud.max_radius() - 1.0).abs() < 1e-12);
            // Recentering on the sample centroid moves radii by O(1/sqrt N).
            assert!(s.cloud.points().iter().all(|p| (norm(p) - 1.0).abs() < 0.1));
        }
    }

    #[test]
    fn surfaces_are_sampled_by_area() {
        // Stretching a cube by (1, 1, 0.5): z-faces keep area 4, the four
        // side faces shrink to 2 each, so z-faces carry 8/16 of the points.
        let mut r = rng::from_seed(2);
        let pts = sample_primitive(Primitive::Cube, 40_000, [1.0, 1.0, 0.5], &mut r);
        let top = pts.iter().filter(|p| (p[2].abs() - 0.5).abs() < 1e-12).count() as f64;
        assert!((top / 40_000.0 - 0.5).abs() < 0.01, "{}", top / 40_000.0);
        // Cylinder: caps carry 1/3 of the area.
        let pts = sample_primitive(Primitive::Cylinder, 30_000, [1.0; 3], &mut r);
        let caps = pts.iter().filter(|p| (p[2].abs() - 1.0).abs() < 1e-12).count() as f64;
        assert!((caps / 30_000.0 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn generation_counts_and_determinism() {
        let names: Vec<&str> = Primitive::ALL.iter().map(|p| p.name()).collect();
        let cfg = PrimitiveConfig::from_names(&names, 3, 256, 9).unwrap();
        let a = generate_primitives(&cfg).unwrap();
        assert_eq!(a.len(), 24);
        assert_eq!(a.class_counts(), alloc::vec![3; 8]);
        assert!(a.samples.iter().all(|s| (s.cloud.max_radius() - 1.0).abs() < 1e-12));
        assert_eq!(a, generate_primitives(&cfg).unwrap());
        let b = generate_primitives(&PrimitiveConfig { seed: 10, ..cfg.clone() }).unwrap();
        assert_ne!(a.samples[0].cloud, b.samples[0].cloud);
        assert_eq!(a.fingerprint(), generate_primitives(&cfg).unwrap().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn full_size_count() {
        let cfg = PrimitiveConfig::new(Primitive::ALL.to_vec(), 250, 64, 1);
        assert_eq!(generate_primitives(&cfg).unwrap().len(), 2000);
    }

    #[test]
    fn unknown_class_name() {
        assert_eq!(
            PrimitiveConfig::from_names(&["sphere", "dodecahedron"], 1, 64, 0),
            Err(Error::UnknownClass("dodecahedron".into()))
        );
    }

    #[test]
    fn stratified_split() {
        let cfg = PrimitiveConfig::new(alloc::vec![Primitive::Cube, Primitive::Torus], 250, 64, 3);
        let ds = generate_primitives(&cfg).unwrap();
        let (train, test) = split(&ds, 0.2, 5).unwrap();
        assert_eq!(train.class_counts(), alloc::vec![200, 200]);
        assert_eq!(test.class_counts(), alloc::vec![50, 50]);
        let mut all: Vec<_> = train.samples.iter().chain(&test.samples).map(|s| s.cloud.clone()).collect();
        let mut orig: Vec<_> = ds.samples.iter().map(|s| s.cloud.clone()).collect();
        let key = |c: &PointCloud| c.points()[0][0].to_bits();
        all.sort_by_key(key);
        orig.sort_by_key(key);
        assert_eq!(all, orig);
        assert_eq!(split(&ds, 0.2, 5).unwrap(), (train, test));
        assert!(split(&ds, 0.0, 5).is_err());
        assert!(split(&ds, 1.0, 5).is_err());

        let uneven = LabeledDataset::new(ds.samples[..7].to_vec(), ds.class_names.clone(), Split::Train).unwrap();
        let (_, t) = split(&uneven, 0.3, 1).unwrap();
        assert_eq!(t.len(), 2);
    }
}
