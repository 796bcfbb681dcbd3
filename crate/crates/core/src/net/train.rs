use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::seq::SliceRandom;
use rand::Rng as _;

use super::config::{NetConfig, TrainConfig};
use super::model::{argmax, Classifier, Encoded, Model, Network};
use super::params::ModelParams;
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::geometry::{add_gaussian_noise, fit_to_unit_ball, rotate_z, PointCloud};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochStats>,
}

/// Training-time view of one sample: random z-rotation, Gaussian jitter,
/// then the configured fit back into the unit ball.
pub fn train_augment(pc: &PointCloud, cfg: &TrainConfig, epoch: usize, index: usize) -> Result<PointCloud> {
    let mut r = rng::stream(cfg.seed, &[tag::TRAIN_AUGMENT, epoch as u64, index as u64]);
    let angle = r.random_range(0.0..2.0 * PI);
    let noise_seed = r.random::<u64>();
    let mut out = if cfg.random_rotation { rotate_z(pc, angle) } else { pc.clone() };
    if cfg.noise_sigma > 0.0 {
        out = add_gaussian_noise(&out, cfg.noise_sigma, noise_seed)?;
        out = fit_to_unit_ball(&out, cfg.ball_fit)?;
    }
    Ok(out)
}

pub fn train(dataset: &LabeledDataset, net: &NetConfig, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, net, cfg, &mut |_| {})
}

/// Mini-batch training; `on_epoch` sees each epoch's statistics as soon as
/// the epoch finishes.
pub fn train_with(
    dataset: &LabeledDataset,
    net: &NetConfig,
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.num_classes() != net.classes {
        return Err(Error::ShapeMismatch(alloc::format!(
            "dataset has {} classes, model expects {}",
            dataset.num_classes(),
            net.classes
        )));
    }
    let network = Network::new(net)?;
    let mut params = ModelParams::init(net, cfg.seed)?;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        order.sort_unstable();
        order.shuffle(&mut rng::stream(cfg.seed, &[tag::SHUFFLE, epoch as u64]));
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let mut encs: Vec<Encoded> = Vec::with_capacity(chunk.len());
            let mut labels = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let sample = &dataset.samples[i];
                encs.push(network.encode(&train_augment(&sample.cloud, cfg, epoch, i)?)?);
                labels.push(sample.label);
            }
            let out = network.loss_and_gradients(params.values(), &encs, &labels)?;
            loss_sum += out.loss * chunk.len() as f64;
            correct += out
                .logits
                .chunks_exact(net.classes)
                .zip(&labels)
                .filter(|(row, &y)| argmax(row) == y)
                .count();
            params.adam_step(&out.grads, lr, cfg.beta1, cfg.beta2, cfg.eps);
        }
        let stats = EpochStats {
            epoch,
            lr,
            loss: loss_sum / dataset.len() as f64,
            train_accuracy: correct as f64 / dataset.len() as f64,
        };
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(TrainOutcome { params, history })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl Evaluation {
    pub fn from_predictions(labels: &[usize], predictions: &[usize], classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != predictions.len() {
            return Err(Error::ShapeMismatch("one prediction per label required".into()));
        }
        let mut confusion = alloc::vec![alloc::vec![0; classes]; classes];
        for (&y, &p) in labels.iter().zip(predictions) {
            if y >= classes || p >= classes {
                return Err(Error::IndexOutOfRange { index: y.max(p), len: classes });
            }
            confusion[y][p] += 1;
        }
        let correct = (0..classes).map(|c| confusion[c][c]).sum();
        Ok(Evaluation { accuracy: correct as f64 / labels.len() as f64, correct, total: labels.len(), confusion })
    }
}

/// Top-1 accuracy and confusion matrix of `classifier` on `dataset`.
pub fn evaluate<C: Classifier + ?Sized>(classifier: &C, dataset: &LabeledDataset) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let clouds: Vec<PointCloud> = dataset.samples.iter().map(|s| s.cloud.clone()).collect();
    let predictions = classifier.predict(&clouds)?;
    let labels: Vec<usize> = dataset.samples.iter().map(|s| s.label).collect();
    Evaluation::from_predictions(&labels, &predictions, classifier.num_classes().max(dataset.num_classes()))
}

/// Convenience: evaluate raw parameters.
pub fn evaluate_params(params: &ModelParams, dataset: &LabeledDataset) -> Result<Evaluation> {
    evaluate(&Model::new(params.clone())?, dataset)
}
