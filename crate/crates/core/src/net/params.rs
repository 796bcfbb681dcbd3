use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use super::config::NetConfig;
use crate::datasets::hex16;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorRole {
    Kernel,
    Slope,
    Weight,
    Bias,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub role: TensorRole,
    pub offset: usize,
    pub len: usize,
    /// Fan-in for dense weights, `degree + 1` for kernels.
    pub fan_in: usize,
}

impl TensorSpec {
    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSlot {
    pub in_channels: usize,
    pub kernel: usize,
    pub slope: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseSlot {
    pub weight: usize,
    pub bias: usize,
    pub inputs: usize,
    pub outputs: usize,
}

/// Positions of every tensor inside the flat parameter vector.
///
/// Order: for each conv layer `t`, `conv{t}.kernel` (filters x in_channels x
/// shells x (degree+1)) then `conv{t}.slope` (filters); then `fc.weight`
/// (hidden x features), `fc.bias`, `fc.slope` (hidden) when a hidden layer
/// exists; then `cls.weight` (classes x inputs) and `cls.bias`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub tensors: Vec<TensorSpec>,
    pub total: usize,
    pub conv: Vec<ConvSlot>,
    pub(crate) fc: Option<(DenseSlot, usize)>,
    pub(crate) cls: DenseSlot,
}

impl Layout {
    pub fn new(cfg: &NetConfig) -> Layout {
        let mut tensors = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, role, len, fan_in| {
            tensors.push(TensorSpec { name, role, offset, len, fan_in });
            offset += len;
            offset - len
        };
        let (k, c, lp) = (cfg.filters, cfg.shells, cfg.degree + 1);
        let mut conv = Vec::new();
        for t in 0..cfg.conv_layers() {
            let in_channels = if t == 0 { 1 } else { k };
            let kernel = push(alloc::format!("conv{t}.kernel"), TensorRole::Kernel, k * in_channels * c * lp, lp);
            let slope = push(alloc::format!("conv{t}.slope"), TensorRole::Slope, k, 0);
            conv.push(ConvSlot { in_channels, kernel, slope });
        }
        let d = cfg.feature_len();
        let fc = (cfg.hidden > 0).then(|| {
            let h = cfg.hidden;
            let weight = push("fc.weight".into(), TensorRole::Weight, h * d, d);
            let bias = push("fc.bias".into(), TensorRole::Bias, h, 0);
            let slope = push("fc.slope".into(), TensorRole::Slope, h, 0);
            (DenseSlot { weight, bias, inputs: d, outputs: h }, slope)
        });
        let ci = if cfg.hidden > 0 { cfg.hidden } else { d };
        let weight = push("cls.weight".into(), TensorRole::Weight, cfg.classes * ci, ci);
        let bias = push("cls.bias".into(), TensorRole::Bias, cfg.classes, 0);
        let cls = DenseSlot { weight, bias, inputs: ci, outputs: cfg.classes };
        Layout { tensors, total: offset, conv, fc, cls }
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorSpec> {
        self.tensors.iter().find(|t| t.name == name)
    }
}

/// Rounds to the nearest `f32`; parameters and optimizer moments are kept on
/// the `f32` grid so checkpoints store them exactly.
#[inline]
pub(crate) fn to_f32_grid(x: f64) -> f64 {
    x as f32 as f64
}

/// Trainable values plus the two optimizer moment vectors and step count.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: NetConfig,
    layout: Layout,
    pub(crate) values: Vec<f64>,
    pub(crate) first_moment: Vec<f64>,
    pub(crate) second_moment: Vec<f64>,
    pub(crate) step: u64,
}

impl ModelParams {
    /// Kernels `N(0, 1/sqrt(degree+1))`, dense weights uniform in
    /// `+-1/sqrt(fan_in)`, biases 0, PReLU slopes 0.25.
    pub fn init(config: &NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(config);
        let mut values = alloc::vec![0.0; layout.total];
        let mut r = rng::stream(seed, &[tag::INIT]);
        for t in &layout.tensors {
            let dst = &mut values[t.range()];
            match t.role {
                TensorRole::Kernel => {
                    let normal = Normal::new(0.0, 1.0 / (t.fan_in as f64).sqrt()).map_err(|_| Error::RankDeficient)?;
                    dst.iter_mut().for_each(|v| *v = normal.sample(&mut r));
                }
                TensorRole::Weight => {
                    let a = 1.0 / (t.fan_in as f64).sqrt();
                    dst.iter_mut().for_each(|v| *v = r.random_range(-a..a));
                }
                TensorRole::Bias => {}
                TensorRole::Slope => dst.iter_mut().for_each(|v| *v = 0.25),
            }
        }
        Self::from_parts(*config, values, None, 0)
    }

    /// Assembles parameters from raw vectors; every value is rounded onto the `f32` grid.
    pub fn from_parts(
        config: NetConfig,
        values: Vec<f64>,
        moments: Option<(Vec<f64>, Vec<f64>)>,
        step: u64,
    ) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let (m, v) = moments.unwrap_or_else(|| (alloc::vec![0.0; layout.total], alloc::vec![0.0; layout.total]));
        for (what, len) in [("values", values.len()), ("first moment", m.len()), ("second moment", v.len())] {
            if len != layout.total {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "{what} has {len} entries, layout needs {}",
                    layout.total
                )));
            }
        }
        if values.iter().chain(&m).chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        let q = |x: Vec<f64>| x.into_iter().map(to_f32_grid).collect::<Vec<_>>();
        Ok(ModelParams { config, layout, values: q(values), first_moment: q(m), second_moment: q(v), step })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.first_moment, &self.second_moment)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.layout.tensor(name).map(|t| &self.values[t.range()])
    }

    /// Overwrites one tensor (values rounded to the `f32` grid).
    pub fn set_tensor(&mut self, name: &str, data: &[f64]) -> Result<()> {
        let t = self.layout.tensor(name).ok_or_else(|| Error::InvalidParameter(alloc::format!("no tensor {name}")))?;
        if data.len() != t.len {
            return Err(Error::ShapeMismatch(alloc::format!("{name} needs {} values, got {}", t.len, data.len())));
        }
        for (dst, &x) in self.values[t.range()].iter_mut().zip(data) {
            *dst = to_f32_grid(x);
        }
        Ok(())
    }

    /// Hash of the configuration and the exact parameter values.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config.describe().as_bytes());
        for v in &self.values {
            h.update(v.to_le_bytes());
        }
        hex16(&h.finalize())
    }

    /// One adaptive-moment step with bias correction; results are rounded to `f32`.
    pub(crate) fn adam_step(&mut self, grads: &[f64], lr: f64, beta1: f64, beta2: f64, eps: f64) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for i in 0..self.values.len() {
            let g = grads[i];
            let m = to_f32_grid(beta1 * self.first_moment[i] + (1.0 - beta1) * g);
            let v = to_f32_grid(beta2 * self.second_moment[i] + (1.0 - beta2) * g * g);
            self.first_moment[i] = m;
            self.second_moment[i] = v;
            self.values[i] = to_f32_grid(self.values[i] - lr * (m / c1) / ((v / c2).sqrt() + eps));
        }
    }
}
