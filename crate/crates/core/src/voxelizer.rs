//! Concentric-sphere voxel grid: `c` equal-width radial shells, each an
//! `n x n` equiangular `(theta, phi)` grid.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::geometry::{norm, PointCloud};
use crate::sht::SphericalSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OccupancyMode {
    /// Voxel value = number of points inside.
    Density,
    /// Voxel value = 1 if any point falls inside.
    Binary,
}

impl OccupancyMode {
    pub fn name(self) -> &'static str {
        match self {
            OccupancyMode::Density => "density",
            OccupancyMode::Binary => "binary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub shells: usize,
    pub resolution: usize,
    pub mode: OccupancyMode,
}

impl GridSpec {
    pub fn new(shells: usize, resolution: usize, mode: OccupancyMode) -> Result<Self> {
        let spec = GridSpec { shells, resolution, mode };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shells == 0 {
            return Err(invalid("grid needs at least one shell"));
        }
        if self.resolution == 0 || self.resolution % 2 != 0 {
            return Err(invalid("grid resolution must be even and positive"));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.shells * self.resolution * self.resolution
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { shells: 7, resolution: 64, mode: OccupancyMode::Density }
    }
}

/// Voxel values laid out row-major as `(shell, theta, phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalVoxelGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

/// `(shell, theta index, phi index)` of a point inside the unit ball.
pub fn voxel_index(p: &[f64; 3], spec: &GridSpec) -> (usize, usize, usize) {
    let (c, n) = (spec.shells, spec.resolution);
    let r = norm(p);
    if r == 0.0 {
        return (0, 0, 0);
    }
    let theta = (p[2] / r).clamp(-1.0, 1.0).acos();
    let mut phi = p[1].atan2(p[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    let shell = ((r * c as f64).floor() as usize).min(c - 1);
    let j = ((theta * n as f64 / PI).floor() as usize).min(n - 1);
    // phi + 2 pi can round up to exactly 2 pi.
    let k = ((phi * n as f64 / (2.0 * PI)).floor() as usize).min(n - 1);
    (shell, j, k)
}

pub fn voxelize(pc: &PointCloud, spec: &GridSpec) -> Result<SphericalVoxelGrid> {
    spec.validate()?;
    let n = spec.resolution;
    let mut values = alloc::vec![0.0; spec.voxel_count()];
    for p in pc.points() {
        let r = norm(p);
        if !(r <= 1.0 + 1e-9) {
            return Err(Error::Unnormalized(r));
        }
        let (s, j, k) = voxel_index(p, spec);
        let v = &mut values[(s * n + j) * n + k];
        match spec.mode {
            OccupancyMode::Density => *v += 1.0,
            OccupancyMode::Binary => *v = 1.0,
        }
    }
    Ok(SphericalVoxelGrid { spec: *spec, values })
}

impl SphericalVoxelGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.voxel_count() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "grid {}x{}x{} needs {} values, got {}",
                spec.shells,
                spec.resolution,
                spec.resolution,
                spec.voxel_count(),
                values.len()
            )));
        }
        Ok(SphericalVoxelGrid { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, shell: usize, j: usize, k: usize) -> f64 {
        let n = self.spec.resolution;
        self.values[(shell * n + j) * n + k]
    }

    pub fn shell_values(&self, shell: usize) -> &[f64] {
        let nn = self.spec.resolution * self.spec.resolution;
        &self.values[shell * nn..(shell + 1) * nn]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// The `n x n` slice of one concentric sphere as a spherical signal.
    pub fn shell_signal(&self, shell: usize) -> Result<SphericalSignal> {
        if shell >= self.spec.shells {
            return Err(Error::IndexOutOfRange { index: shell, len: self.spec.shells });
        }
        SphericalSignal::new(self.spec.resolution, self.shell_values(shell).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotate_z;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn spec(mode: OccupancyMode) -> GridSpec {
        GridSpec::new(7, 64, mode).unwrap()
    }

    #[test]
    fn north_pole_point() {
        let pc = PointCloud::new(alloc::vec![[0.0, 0.0, 1.0]]).unwrap();
        let g = voxelize(&pc, &spec(OccupancyMode::Density)).unwrap();
        assert_eq!(g.get(6, 0, 0), 1.0);
        assert_eq!(g.total(), 1.0);
    }

    #[test]
    fn origin_maps_to_first_voxel() {
        let pc = PointCloud::new(alloc::vec![[0.0, 0.0, 0.0]]).unwrap();
        let g = voxelize(&pc, &spec(OccupancyMode::Density)).unwrap();
        assert_eq!(g.get(0, 0, 0), 1.0);
    }

    #[test]
    fn coincident_points_density_vs_binary() {
        let pc = PointCloud::new(alloc::vec![[0.3, -0.2, 0.1]; 2]).unwrap();
        let d = voxelize(&pc, &spec(OccupancyMode::Density)).unwrap();
        let b = voxelize(&pc, &spec(OccupancyMode::Binary)).unwrap();
        assert_eq!(d.values().iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(d.total(), 2.0);
        assert_eq!(b.total(), 1.0);
    }

    #[test]
    fn rejects_points_outside_ball() {
        let pc = PointCloud::new(alloc::vec![[1.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(voxelize(&pc, &spec(OccupancyMode::Density)), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn shell_signals() {
        let pc = PointCloud::new(alloc::vec![[0.05, 0.02, 0.01], [0.0, 0.9, 0.1]]).unwrap();
        let g = voxelize(&pc, &spec(OccupancyMode::Density)).unwrap();
        assert!(g.shell_signal(3).unwrap().values().iter().all(|&v| v == 0.0));
        let (s, j, k) = voxel_index(&[0.0, 0.9, 0.1], g.spec());
        let sig = g.shell_signal(s).unwrap();
        assert_eq!(sig.values().iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(sig.get(j, k), 1.0);
        let stacked: Vec<f64> =
            (0..7).flat_map(|s| g.shell_signal(s).unwrap().into_values()).collect();
        assert_eq!(stacked, g.values());
        assert!(matches!(g.shell_signal(7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn shell_totals_follow_shell_volumes() {
        // Uniform ball sample: shell s holds a multinomial share ((s+1)^3 - s^3) / c^3.
        let mut r = rng::from_seed(21);
        let total = 100_000;
        let mut pts = Vec::with_capacity(total);
        while pts.len() < total {
            let p = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            if norm(&p) <= 1.0 {
                pts.push(p);
            }
        }
        let g = voxelize(&PointCloud::new(pts).unwrap(), &spec(OccupancyMode::Density)).unwrap();
        let c = 7.0f64;
        for s in 0..7 {
            let sf = s as f64;
            let prob = ((sf + 1.0).powi(3) - sf.powi(3)) / c.powi(3);
            let expected = prob * total as f64;
            let std = (total as f64 * prob * (1.0 - prob)).sqrt();
            let got: f64 = g.shell_values(s).iter().sum();
            assert!((got - expected).abs() < 3.0 * std, "shell {s}: {got} vs {expected}");
        }
        assert_eq!(g.total(), total as f64);
    }

    proptest! {
        #[test]
        fn grid_rotation_is_a_column_shift(seed in any::<u64>(), t in 0usize..64) {
            let spec = GridSpec::new(4, 64, OccupancyMode::Density).unwrap();
            let mut r = rng::from_seed(seed);
            let angle = 2.0 * PI * t as f64 / 64.0;
            let mut pts = Vec::new();
            while pts.len() < 100 {
                let p = [r.random_range(-0.57..0.57), r.random_range(-0.57..0.57), r.random_range(-0.57..0.57)];
                // Keep away from bin edges so rounding in the rotation cannot move a point.
                let rho = norm(&p);
                let phi = p[1].atan2(p[0]).rem_euclid(2.0 * PI) * 64.0 / (2.0 * PI);
                let shell = rho * 4.0;
                if (phi - phi.round()).abs() > 1e-6 && (shell - shell.round()).abs() > 1e-6 && rho > 1e-3 {
                    pts.push(p);
                }
            }
            let pc = PointCloud::new(pts).unwrap();
            let g = voxelize(&pc, &spec).unwrap();
            let gr = voxelize(&rotate_z(&pc, angle), &spec).unwrap();
            for s in 0..4 {
                let shifted = g.shell_signal(s).unwrap().shift_phi(t);
                prop_assert_eq!(shifted.values(), gr.shell_values(s));
            }
            prop_assert_eq!(g.total(), gr.total());
            let b = voxelize(&pc, &GridSpec { mode: OccupancyMode::Binary, ..spec }).unwrap();
            for (bv, dv) in b.values().iter().zip(g.values()) {
                prop_assert_eq!(*bv, dv.min(1.0));
            }
        }
    }
}
