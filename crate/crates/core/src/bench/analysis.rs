use alloc::string::ToString;
use alloc::vec::Vec;
use num_traits::Float;

use super::table::Table;
use crate::error::{invalid, Result};
use crate::geometry::{add_uniform_outliers, fit_to_unit_ball, BallFit, PointCloud};
use crate::net::{inverse_after_conv, magnitude_features, ModelParams, Network, SpectralMaps};
use crate::sht::ShTransform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub outlier_fraction: f64,
    pub seed: u64,
    pub bins: usize,
    pub ball_fit: BallFit,
    /// Grid of the inverse transform; `None` uses the model's input resolution.
    pub resolution: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { outlier_fraction: 0.5, seed: 0, bins: 40, ball_fit: BallFit::default(), resolution: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceStats {
    pub rms: f64,
    pub max_abs: f64,
    pub count: usize,
    pub histogram: Vec<usize>,
}

/// Clean-vs-outlier feature differences of the two paths, histogrammed on
/// shared, equal-width bins.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalAnalysis {
    pub spectral: DifferenceStats,
    pub ift: DifferenceStats,
    pub bin_edges: Vec<f64>,
}

fn activate(maps: &SpectralMaps, slopes: &[f64]) -> SpectralMaps {
    let block = maps.shells * maps.coeffs();
    let mut out = maps.clone();
    for i in 0..out.len() {
        let a = slopes[i / block];
        for v in [&mut out.re[i], &mut out.im[i]] {
            if *v < 0.0 {
                *v *= a;
            }
        }
    }
    out
}

fn spatial(maps: &SpectralMaps, slopes: &[f64], plan: &ShTransform) -> Result<Vec<f64>> {
    let per_channel = maps.shells * plan.resolution() * plan.resolution();
    let mut v = inverse_after_conv(maps, plan)?;
    for (i, x) in v.iter_mut().enumerate() {
        if *x < 0.0 {
            *x *= slopes[i / per_channel];
        }
    }
    Ok(v)
}

fn stats(diff: &[f64], edges: &[f64]) -> DifferenceStats {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut histogram = alloc::vec![0; bins];
    for &d in diff {
        let b = (((d - lo) / (hi - lo)) * bins as f64).floor();
        histogram[(b.max(0.0) as usize).min(bins - 1)] += 1;
    }
    let rms = if diff.is_empty() { 0.0 } else { (diff.iter().map(|d| d * d).sum::<f64>() / diff.len() as f64).sqrt() };
    DifferenceStats { rms, max_abs: diff.iter().fold(0.0, |m, d| m.max(d.abs())), count: diff.len(), histogram }
}

/// Runs `clean` and its outlier-corrupted twin through the convolution of
/// `params`, then compares the features each path would pass on: magnitudes
/// of the activated spectra versus the activated inverse-transform maps.
pub fn run_ift_signal_analysis(clean: &PointCloud, params: &ModelParams, cfg: &AnalysisConfig) -> Result<SignalAnalysis> {
    if cfg.bins == 0 {
        return Err(invalid("need at least one histogram bin"));
    }
    let net = Network::new(params.config())?;
    let last = net.layout().conv.len().checked_sub(1).ok_or_else(|| invalid("model has no convolution"))?;
    let slopes = params.tensor(&alloc::format!("conv{last}.slope")).expect("slope tensor");
    let noisy = fit_to_unit_ball(&add_uniform_outliers(clean, cfg.outlier_fraction, cfg.seed)?, cfg.ball_fit)?;
    let plan = ShTransform::new(cfg.resolution.unwrap_or(params.config().resolution), params.config().degree)?;

    let mut spectral_feats = Vec::new();
    let mut ift_feats = Vec::new();
    for pc in [clean, &noisy] {
        let z = net.conv_output(params.values(), &net.encode(pc)?)?;
        spectral_feats.push(magnitude_features(&activate(&z, slopes)));
        ift_feats.push(spatial(&z, slopes, &plan)?);
    }
    let sd: Vec<f64> = spectral_feats[0].iter().zip(&spectral_feats[1]).map(|(a, b)| a - b).collect();
    let id: Vec<f64> = ift_feats[0].iter().zip(&ift_feats[1]).map(|(a, b)| a - b).collect();
    let m = sd.iter().chain(&id).fold(0.0f64, |m, d| m.max(d.abs()));
    let m = if m > 0.0 { m } else { 1.0 };
    let bin_edges: Vec<f64> = (0..=cfg.bins).map(|i| -m + 2.0 * m * i as f64 / cfg.bins as f64).collect();
    Ok(SignalAnalysis { spectral: stats(&sd, &bin_edges), ift: stats(&id, &bin_edges), bin_edges })
}

impl SignalAnalysis {
    pub fn to_table(&self) -> Table {
        let mut metadata = alloc::vec![("experiment".to_string(), "ift-signal-analysis".to_string())];
        for (name, s) in [("spectral", &self.spectral), ("ift", &self.ift)] {
            metadata.push((alloc::format!("{name}.rms"), alloc::format!("{:.6e}", s.rms)));
            metadata.push((alloc::format!("{name}.max_abs"), alloc::format!("{:.6e}", s.max_abs)));
            metadata.push((alloc::format!("{name}.count"), s.count.to_string()));
        }
        let header = ["bin_lower", "bin_upper", "spectral_count", "ift_count"].map(|s| s.to_string()).to_vec();
        let rows = (0..self.bin_edges.len() - 1)
            .map(|b| {
                alloc::vec![
                    alloc::format!("{:.6e}", self.bin_edges[b]),
                    alloc::format!("{:.6e}", self.bin_edges[b + 1]),
                    self.spectral.histogram[b].to_string(),
                    self.ift.histogram[b].to_string(),
                ]
            })
            .collect();
        Table { metadata, header, rows }
    }
}
