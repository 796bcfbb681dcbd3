use alloc::string::String;

use crate::error::{invalid, Result};
use crate::geometry::BallFit;
use crate::sht::{coeff_count, DescriptorKind};
use crate::voxelizer::{GridSpec, OccupancyMode};

/// What the dense head sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// `|PReLU(conv)|` per (filter, shell, l, m >= 0).
    Magnitude,
    /// Inverse transform of the last conv layer, spatial PReLU, flattened.
    InverseTransform,
    /// Fixed descriptor of the input spectra; no convolution at all.
    Descriptor(DescriptorKind),
}

impl FeatureMode {
    pub fn code(self) -> u32 {
        match self {
            FeatureMode::Magnitude => 0,
            FeatureMode::InverseTransform => 1,
            FeatureMode::Descriptor(DescriptorKind::F1) => 2,
            FeatureMode::Descriptor(DescriptorKind::F2) => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => FeatureMode::Magnitude,
            1 => FeatureMode::InverseTransform,
            2 => FeatureMode::Descriptor(DescriptorKind::F1),
            3 => FeatureMode::Descriptor(DescriptorKind::F2),
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Magnitude => "magnitude",
            FeatureMode::InverseTransform => "ift",
            FeatureMode::Descriptor(DescriptorKind::F1) => "descriptor-F1",
            FeatureMode::Descriptor(DescriptorKind::F2) => "descriptor-F2",
        }
    }

    pub fn has_conv(self) -> bool {
        !matches!(self, FeatureMode::Descriptor(_))
    }
}

/// Architecture of one model. Everything that fixes a tensor shape lives here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub filters: usize,
    pub shells: usize,
    pub degree: usize,
    pub resolution: usize,
    /// Width of the hidden dense layer; 0 feeds features straight into the classifier.
    pub hidden: usize,
    pub classes: usize,
    /// Number of stacked spectral convolutions, 1 to 4.
    pub layers: usize,
    pub features: FeatureMode,
    /// Grid size used by the inverse-transform head.
    pub ift_resolution: usize,
    pub occupancy: OccupancyMode,
    /// Scale density grids by `n^2 / point_count` so features do not depend
    /// on how many points a cloud has.
    pub normalize_counts: bool,
}

impl NetConfig {
    pub fn new(classes: usize) -> Self {
        NetConfig {
            filters: 16,
            shells: 7,
            degree: 9,
            resolution: 64,
            hidden: 1024,
            classes,
            layers: 1,
            features: FeatureMode::Magnitude,
            ift_resolution: 20,
            occupancy: OccupancyMode::Density,
            normalize_counts: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(invalid("need at least 2 classes"));
        }
        if self.features.has_conv() {
            if self.filters == 0 {
                return Err(invalid("filters must be >= 1"));
            }
            if !(1..=4).contains(&self.layers) {
                return Err(invalid("layers must be in 1..=4"));
            }
        }
        self.grid()?;
        if self.resolution < 2 * (self.degree + 1) {
            return Err(invalid(alloc::format!(
                "resolution {} cannot carry degree {}",
                self.resolution,
                self.degree
            )));
        }
        if self.features == FeatureMode::InverseTransform
            && (self.ift_resolution % 2 != 0 || self.ift_resolution < 2 * (self.degree + 1))
        {
            return Err(invalid("ift resolution must be even and >= 2 (degree + 1)"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.shells, self.resolution, self.occupancy)
    }

    pub fn coeffs(&self) -> usize {
        coeff_count(self.degree)
    }

    /// Length of the feature vector entering the dense head.
    pub fn feature_len(&self) -> usize {
        match self.features {
            FeatureMode::Magnitude => self.filters * self.shells * self.coeffs(),
            FeatureMode::InverseTransform => {
                self.filters * self.shells * self.ift_resolution * self.ift_resolution
            }
            FeatureMode::Descriptor(kind) => self.shells * kind.per_shell_len(self.degree),
        }
    }

    pub fn conv_layers(&self) -> usize {
        if self.features.has_conv() {
            self.layers
        } else {
            0
        }
    }

    /// Short `key=value` rendering, stable across runs, used in hashes and logs.
    pub fn describe(&self) -> String {
        alloc::format!(
            "filters={} shells={} degree={} resolution={} hidden={} classes={} layers={} features={} ift_resolution={} occupancy={} normalize_counts={}",
            self.filters,
            self.shells,
            self.degree,
            self.resolution,
            self.hidden,
            self.classes,
            self.layers,
            self.features.name(),
            self.ift_resolution,
            self.occupancy.name(),
            self.normalize_counts
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Std of the per-sample Gaussian jitter; 0 disables it.
    pub noise_sigma: f64,
    pub random_rotation: bool,
    pub ball_fit: BallFit,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            epochs: 48,
            lr_start: 1e-3,
            lr_end: 4e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            noise_sigma: 0.02,
            random_rotation: true,
            ball_fit: BallFit::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(invalid("batch size and epochs must be >= 1"));
        }
        if !(self.lr_start >= self.lr_end && self.lr_end > 0.0) {
            return Err(invalid("learning rates must satisfy lr_start >= lr_end > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(invalid("noise sigma must be >= 0"));
        }
        Ok(())
    }

    /// Exponential decay hitting `lr_start` at epoch 0 and `lr_end` at the last epoch.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr_start;
        }
        if epoch + 1 >= self.epochs {
            return self.lr_end;
        }
        let t = epoch as f64 / (self.epochs - 1) as f64;
        self.lr_start * num_traits::Float::powf(self.lr_end / self.lr_start, t)
    }
}
