use alloc::vec::Vec;
use num_traits::Float;

use super::config::{FeatureMode, NetConfig};
use super::layers::{conv_gains, conv_into, degree_of_index, gemm, magnitude_features, prelu, SpectralMaps};
use super::params::{Layout, ModelParams};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::sht::{descriptor, ShSpectrum, ShTransform};
use crate::voxelizer::{voxelize, OccupancyMode, SphericalVoxelGrid};

/// Parameter-free preprocessing of one cloud: the per-shell input spectra,
/// or the finished descriptor for descriptor-only models.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoded {
    Spectra(SpectralMaps),
    Features(Vec<f64>),
}

/// Shape-specific machinery (transform plans, index tables) for one
/// [`NetConfig`]. Parameters are passed in as a flat slice laid out by
/// [`Layout`].
#[derive(Debug, Clone)]
pub struct Network {
    cfg: NetConfig,
    layout: Layout,
    input_plan: ShTransform,
    ift_plan: Option<ShTransform>,
    gains: Vec<f64>,
    lof: Vec<usize>,
}

#[derive(Debug, Clone)]
struct FrontCache {
    /// Input of every conv layer.
    inputs: Vec<SpectralMaps>,
    /// Pre-activation output of every conv layer.
    pre: Vec<SpectralMaps>,
    post_last: Option<SpectralMaps>,
    spatial_pre: Vec<f64>,
    features: Vec<f64>,
}

struct DenseCache {
    x: Vec<f64>,
    hpre: Vec<f64>,
    h: Vec<f64>,
    logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossAndGradients {
    pub loss: f64,
    pub grads: Vec<f64>,
    /// Row-major `batch x classes`.
    pub logits: Vec<f64>,
}

impl Network {
    pub fn new(cfg: &NetConfig) -> Result<Self> {
        cfg.validate()?;
        let ift_plan = match cfg.features {
            FeatureMode::InverseTransform => Some(ShTransform::new(cfg.ift_resolution, cfg.degree)?),
            _ => None,
        };
        Ok(Network {
            cfg: *cfg,
            layout: Layout::new(cfg),
            input_plan: ShTransform::new(cfg.resolution, cfg.degree)?,
            ift_plan,
            gains: conv_gains(cfg.degree),
            lof: degree_of_index(cfg.degree),
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn input_plan(&self) -> &ShTransform {
        &self.input_plan
    }

    /// Voxelize, optionally rescale counts, and transform every shell.
    pub fn encode(&self, pc: &PointCloud) -> Result<Encoded> {
        let grid = voxelize(pc, &self.cfg.grid()?)?;
        self.encode_grid(&grid, pc.len())
    }

    pub fn encode_grid(&self, grid: &SphericalVoxelGrid, point_count: usize) -> Result<Encoded> {
        if *grid.spec() != self.cfg.grid()? {
            return Err(Error::ShapeMismatch("grid does not match model configuration".into()));
        }
        let spectra = self.shell_spectra(grid, point_count)?;
        match self.cfg.features {
            FeatureMode::Descriptor(kind) => Ok(Encoded::Features(descriptor(kind, &spectra)?.values)),
            _ => Ok(Encoded::Spectra(SpectralMaps::from_spectra(&spectra)?)),
        }
    }

    /// Forward transform of each shell, scaled by `n^2 / point_count` for
    /// density grids when count normalization is on.
    pub fn shell_spectra(&self, grid: &SphericalVoxelGrid, point_count: usize) -> Result<Vec<ShSpectrum>> {
        let n = self.cfg.resolution;
        let scale = if self.cfg.normalize_counts && self.cfg.occupancy == OccupancyMode::Density {
            if point_count == 0 {
                return Err(Error::EmptyCloud);
            }
            (n * n) as f64 / point_count as f64
        } else {
            1.0
        };
        (0..self.cfg.shells)
            .map(|s| {
                let mut spec = ShSpectrum::zeros(self.cfg.degree);
                self.input_plan.forward_into(grid.shell_values(s), spec.coeffs_mut());
                spec.coeffs_mut().iter_mut().for_each(|c| *c *= scale);
                Ok(spec)
            })
            .collect()
    }

    fn check_params(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.layout.total {
            return Err(Error::ShapeMismatch(alloc::format!(
                "parameter vector has {} entries, model needs {}",
                w.len(),
                self.layout.total
            )));
        }
        Ok(())
    }

    fn check_encoded(&self, enc: &Encoded) -> Result<()> {
        let ok = match (enc, self.cfg.features) {
            (Encoded::Features(f), FeatureMode::Descriptor(_)) => f.len() == self.cfg.feature_len(),
            (Encoded::Spectra(s), mode) if mode.has_conv() => {
                s.channels == 1 && s.shells == self.cfg.shells && s.degree == self.cfg.degree
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("encoded input does not match model configuration".into()))
        }
    }

    /// Pre-activation output of the last convolution layer.
    pub fn conv_output(&self, w: &[f64], enc: &Encoded) -> Result<SpectralMaps> {
        self.check_params(w)?;
        self.check_encoded(enc)?;
        let cache = self.front_forward(w, enc);
        cache.pre.last().cloned().ok_or_else(|| Error::InvalidParameter("model has no convolution".into()))
    }

    /// Feature vector handed to the dense head.
    pub fn features(&self, w: &[f64], enc: &Encoded) -> Result<Vec<f64>> {
        self.check_params(w)?;
        self.check_encoded(enc)?;
        Ok(self.front_forward(w, enc).features)
    }

    fn front_forward(&self, w: &[f64], enc: &Encoded) -> FrontCache {
        let mut cache = FrontCache {
            inputs: Vec::new(),
            pre: Vec::new(),
            post_last: None,
            spatial_pre: Vec::new(),
            features: Vec::new(),
        };
        let x = match enc {
            Encoded::Features(f) => {
                cache.features = f.clone();
                return cache;
            }
            Encoded::Spectra(x) => x,
        };
        let (k, c, l) = (self.cfg.filters, self.cfg.shells, self.cfg.degree);
        let p = self.cfg.coeffs();
        let layers = self.layout.conv.len();
        let mut a = x.clone();
        for (t, slot) in self.layout.conv.iter().enumerate() {
            let kernel_len = k * slot.in_channels * c * (l + 1);
            let mut z = SpectralMaps::zeros(k, c, l);
            conv_into(&a, &w[slot.kernel..slot.kernel + kernel_len], k, &self.gains, &self.lof, &mut z);
            let slopes = &w[slot.slope..slot.slope + k];
            let last = t + 1 == layers;
            cache.inputs.push(a);
            if last && self.cfg.features == FeatureMode::InverseTransform {
                let plan = self.ift_plan.as_ref().expect("ift plan");
                let nn = plan.resolution() * plan.resolution();
                let mut spatial = alloc::vec![0.0; k * c * nn];
                for (b, dst) in spatial.chunks_exact_mut(nn).enumerate() {
                    plan.inverse_into(&z.re[b * p..(b + 1) * p], &z.im[b * p..(b + 1) * p], dst);
                }
                cache.features =
                    spatial.iter().enumerate().map(|(i, &v)| prelu(v, slopes[i / (c * nn)])).collect();
                cache.spatial_pre = spatial;
                cache.pre.push(z);
                return cache;
            }
            let mut post = z.clone();
            let block = c * p;
            for (i, (re, im)) in post.re.iter_mut().zip(post.im.iter_mut()).enumerate() {
                let s = slopes[i / block];
                *re = prelu(*re, s);
                *im = prelu(*im, s);
            }
            cache.pre.push(z);
            a = post;
        }
        cache.features = magnitude_features(&a);
        cache.post_last = Some(a);
        cache
    }

    fn front_backward(&self, w: &[f64], cache: &FrontCache, dfeat: &[f64], g: &mut [f64]) {
        let Some(last) = cache.pre.len().checked_sub(1) else {
            return;
        };
        let (k, c, l) = (self.cfg.filters, self.cfg.shells, self.cfg.degree);
        let (p, lp) = (self.cfg.coeffs(), l + 1);
        let mut d = SpectralMaps::zeros(k, c, l);
        if self.cfg.features == FeatureMode::InverseTransform {
            let plan = self.ift_plan.as_ref().expect("ift plan");
            let nn = plan.resolution() * plan.resolution();
            let slot = self.layout.conv[last];
            let mut ds = alloc::vec![0.0; nn];
            for b in 0..k * c {
                let o = b / c;
                let a = w[slot.slope + o];
                for pix in 0..nn {
                    let (x, gf) = (cache.spatial_pre[b * nn + pix], dfeat[b * nn + pix]);
                    ds[pix] = if x < 0.0 {
                        g[slot.slope + o] += gf * x;
                        gf * a
                    } else {
                        gf
                    };
                }
                plan.inverse_adjoint(&ds, &mut d.re[b * p..(b + 1) * p], &mut d.im[b * p..(b + 1) * p]);
            }
        } else {
            let post = cache.post_last.as_ref().expect("magnitude head keeps its input");
            for i in 0..d.len() {
                let (re, im) = (post.re[i], post.im[i]);
                let mag = re.hypot(im);
                // Subgradient (1, 0) at the origin keeps a zero spectrum trainable.
                if mag > 0.0 {
                    d.re[i] = dfeat[i] * re / mag;
                    d.im[i] = dfeat[i] * im / mag;
                } else {
                    d.re[i] = dfeat[i];
                }
            }
            self.prelu_backward(w, last, &cache.pre[last], &mut d, g);
        }
        for t in (0..=last).rev() {
            if t < last {
                self.prelu_backward(w, t, &cache.pre[t], &mut d, g);
            }
            let slot = self.layout.conv[t];
            let input = &cache.inputs[t];
            let ci = slot.in_channels;
            let mut dinput = (t > 0).then(|| SpectralMaps::zeros(ci, c, l));
            for o in 0..k {
                for i in 0..ci {
                    for s in 0..c {
                        let hoff = slot.kernel + ((o * ci + i) * c + s) * lp;
                        let src = (i * c + s) * p;
                        let dst = (o * c + s) * p;
                        for idx in 0..p {
                            let deg = self.lof[idx];
                            let (dr, di) = (d.re[dst + idx], d.im[dst + idx]);
                            g[hoff + deg] += self.gains[deg] * (dr * input.re[src + idx] + di * input.im[src + idx]);
                            if let Some(da) = dinput.as_mut() {
                                let f = self.gains[deg] * w[hoff + deg];
                                da.re[src + idx] += f * dr;
                                da.im[src + idx] += f * di;
                            }
                        }
                    }
                }
            }
            match dinput {
                Some(da) => d = da,
                None => break,
            }
        }
    }

    /// Turns the gradient w.r.t. a layer's activation into the gradient
    /// w.r.t. its pre-activation and accumulates the slope gradient.
    fn prelu_backward(&self, w: &[f64], t: usize, z: &SpectralMaps, d: &mut SpectralMaps, g: &mut [f64]) {
        let slot = self.layout.conv[t];
        let block = self.cfg.shells * self.cfg.coeffs();
        for i in 0..d.len() {
            let o = i / block;
            let a = w[slot.slope + o];
            for (x, dx) in [(z.re[i], &mut d.re[i]), (z.im[i], &mut d.im[i])] {
                if x < 0.0 {
                    g[slot.slope + o] += *dx * x;
                    *dx *= a;
                }
            }
        }
    }

    fn dense_forward(&self, w: &[f64], x: Vec<f64>, batch: usize) -> DenseCache {
        let (hpre, h) = match self.layout.fc {
            Some((fc, slope)) => {
                let (d, hw) = (fc.inputs, fc.outputs);
                let mut hpre: Vec<f64> = (0..batch).flat_map(|_| w[fc.bias..fc.bias + hw].iter().copied()).collect();
                gemm(batch, d, hw, &x, (d, 1), &w[fc.weight..fc.weight + hw * d], (1, d), 1.0, &mut hpre);
                let h = hpre.iter().enumerate().map(|(i, &v)| prelu(v, w[slope + i % hw])).collect();
                (hpre, h)
            }
            None => (Vec::new(), Vec::new()),
        };
        let cls = self.layout.cls;
        let (ci, nc) = (cls.inputs, cls.outputs);
        let mut logits: Vec<f64> = (0..batch).flat_map(|_| w[cls.bias..cls.bias + nc].iter().copied()).collect();
        let input = if self.layout.fc.is_some() { &h } else { &x };
        gemm(batch, ci, nc, input, (ci, 1), &w[cls.weight..cls.weight + nc * ci], (1, ci), 1.0, &mut logits);
        DenseCache { x, hpre, h, logits }
    }

    /// Returns the gradient w.r.t. the dense head's input features.
    fn dense_backward(&self, w: &[f64], cache: &DenseCache, dlogits: &[f64], batch: usize, g: &mut [f64]) -> Vec<f64> {
        let cls = self.layout.cls;
        let (ci, nc) = (cls.inputs, cls.outputs);
        let input = if self.layout.fc.is_some() { &cache.h } else { &cache.x };
        gemm(nc, batch, ci, dlogits, (1, nc), input, (ci, 1), 1.0, &mut g[cls.weight..cls.weight + nc * ci]);
        for row in dlogits.chunks_exact(nc) {
            for (gb, &dv) in g[cls.bias..cls.bias + nc].iter_mut().zip(row) {
                *gb += dv;
            }
        }
        let mut dh = alloc::vec![0.0; batch * ci];
        gemm(batch, nc, ci, dlogits, (nc, 1), &w[cls.weight..cls.weight + nc * ci], (ci, 1), 0.0, &mut dh);
        let Some((fc, slope)) = self.layout.fc else {
            return dh;
        };
        let (d, hw) = (fc.inputs, fc.outputs);
        for (i, dv) in dh.iter_mut().enumerate() {
            let x = cache.hpre[i];
            if x < 0.0 {
                let u = i % hw;
                g[slope + u] += *dv * x;
                *dv *= w[slope + u];
            }
        }
        gemm(hw, batch, d, &dh, (1, hw), &cache.x, (d, 1), 1.0, &mut g[fc.weight..fc.weight + hw * d]);
        for row in dh.chunks_exact(hw) {
            for (gb, &dv) in g[fc.bias..fc.bias + hw].iter_mut().zip(row) {
                *gb += dv;
            }
        }
        let mut dx = alloc::vec![0.0; batch * d];
        gemm(batch, hw, d, &dh, (hw, 1), &w[fc.weight..fc.weight + hw * d], (d, 1), 0.0, &mut dx);
        dx
    }

    /// Class logits, row-major `batch x classes`.
    pub fn logits(&self, w: &[f64], batch: &[Encoded]) -> Result<Vec<f64>> {
        self.check_params(w)?;
        let mut x = Vec::with_capacity(batch.len() * self.cfg.feature_len());
        for enc in batch {
            self.check_encoded(enc)?;
            x.extend(self.front_forward(w, enc).features);
        }
        Ok(self.dense_forward(w, x, batch.len()).logits)
    }

    /// Mean softmax cross-entropy over the batch and its gradient w.r.t.
    /// every entry of `w`.
    pub fn loss_and_gradients(&self, w: &[f64], batch: &[Encoded], labels: &[usize]) -> Result<LossAndGradients> {
        self.check_params(w)?;
        if batch.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != batch.len() {
            return Err(Error::ShapeMismatch("one label per sample required".into()));
        }
        let nc = self.cfg.classes;
        if let Some(&bad) = labels.iter().find(|&&y| y >= nc) {
            return Err(Error::IndexOutOfRange { index: bad, len: nc });
        }
        let b = batch.len();
        let mut caches = Vec::with_capacity(b);
        let mut x = Vec::with_capacity(b * self.cfg.feature_len());
        for enc in batch {
            self.check_encoded(enc)?;
            let cache = self.front_forward(w, enc);
            x.extend_from_slice(&cache.features);
            caches.push(cache);
        }
        let dense = self.dense_forward(w, x, b);
        let mut loss = 0.0;
        let mut dlogits = alloc::vec![0.0; b * nc];
        for (i, (row, &y)) in dense.logits.chunks_exact(nc).zip(labels).enumerate() {
            let probs = softmax(row);
            loss -= probs[y].ln();
            for (j, pr) in probs.into_iter().enumerate() {
                dlogits[i * nc + j] = (pr - if j == y { 1.0 } else { 0.0 }) / b as f64;
            }
        }
        let mut g = alloc::vec![0.0; self.layout.total];
        let dx = self.dense_backward(w, &dense, &dlogits, b, &mut g);
        let d = self.cfg.feature_len();
        for (i, cache) in caches.iter().enumerate() {
            self.front_backward(w, cache, &dx[i * d..(i + 1) * d], &mut g);
        }
        Ok(LossAndGradients { loss: loss / b as f64, grads: g, logits: dense.logits })
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&v| (v - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Anything that maps clouds to class indices.
pub trait Classifier {
    fn num_classes(&self) -> usize;
    fn predict(&self, clouds: &[PointCloud]) -> Result<Vec<usize>>;

    /// Identifies the classifier in result metadata.
    fn fingerprint(&self) -> alloc::string::String {
        "unversioned".into()
    }
}

/// Trained parameters bundled with the machinery to run them.
#[derive(Debug, Clone)]
pub struct Model {
    network: Network,
    params: ModelParams,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(Model { network: Network::new(params.config())?, params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn into_params(self) -> ModelParams {
        self.params
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn logits(&self, pc: &PointCloud) -> Result<Vec<f64>> {
        let enc = self.network.encode(pc)?;
        self.network.logits(self.params.values(), core::slice::from_ref(&enc))
    }

    pub fn logits_batch(&self, clouds: &[PointCloud]) -> Result<Vec<f64>> {
        let encs = clouds.iter().map(|pc| self.network.encode(pc)).collect::<Result<Vec<_>>>()?;
        self.network.logits(self.params.values(), &encs)
    }
}

impl Classifier for Model {
    fn num_classes(&self) -> usize {
        self.params.config().classes
    }

    fn predict(&self, clouds: &[PointCloud]) -> Result<Vec<usize>> {
        let nc = self.num_classes();
        let mut out = Vec::with_capacity(clouds.len());
        for chunk in clouds.chunks(64) {
            let logits = self.logits_batch(chunk)?;
            out.extend(logits.chunks_exact(nc).map(argmax));
        }
        Ok(out)
    }

    fn fingerprint(&self) -> alloc::string::String {
        self.params.fingerprint()
    }
}
