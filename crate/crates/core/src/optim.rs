//! Adam with step-decay learning rate and the seeded mini-batch training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeatureSet;
use crate::error::{Error, Result};
use crate::grad::batch_gradient;
use crate::model::{Model, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zero moments with `β1 = 0.9`, `β2 = 0.999`, `ε = 1e-8`.
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::config(format!(
                "optimizer tracks {} parameters, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient entry {i} is {} at optimizer step {}",
                grads[i],
                self.t + 1
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    /// Epochs between learning-rate decays.
    pub decay_every: usize,
    pub decay_factor: f64,
    pub seed: u64,
    pub repeats: usize,
}

impl Default for TrainConfig {
    /// 20 epochs, batches of 4, Adam at 0.01 decayed ×0.1 every 10 epochs, 5 repeats.
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 4,
            lr0: 0.01,
            decay_every: 10,
            decay_factor: 0.1,
            seed: 1,
            repeats: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.epochs < 1 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr0));
        }
        if self.decay_every < 1 {
            return bad("decay interval must be at least 1 epoch".into());
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return bad(format!(
                "decay factor must be in (0, 1], got {}",
                self.decay_factor
            ));
        }
        if self.repeats < 1 {
            return bad("repeats must be at least 1".into());
        }
        Ok(())
    }

    /// `lr0 · decay_factor^⌊(epoch − 1) / decay_every⌋` for 1-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        assert!(epoch >= 1, "epochs are 1-based");
        let decays = (epoch - 1) / self.decay_every;
        self.lr0 * self.decay_factor.powi(decays as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses seen during the epoch.
    pub mean_train_loss: f64,
    /// Percent correct on the test set after the epoch.
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub seed: u64,
    pub params: ModelParams,
    pub curve: Vec<EpochRecord>,
    /// Optimizer steps taken.
    pub steps: u64,
}

impl TrainOutcome {
    pub fn final_record(&self) -> &EpochRecord {
        self.curve.last().expect("training runs at least one epoch")
    }
}

fn check_data(model: &Model, set: &FeatureSet, what: &str) -> Result<()> {
    let cfg = model.config();
    if set.is_empty() {
        return Err(Error::config(format!("{what} set is empty")));
    }
    if set.dim() != cfg.feature_dim {
        return Err(Error::config(format!(
            "{what} set has {} features, model expects {}",
            set.dim(),
            cfg.feature_dim
        )));
    }
    if set.class_count() > cfg.num_classes {
        return Err(Error::config(format!(
            "{what} set has {} classes, model has {}",
            set.class_count(),
            cfg.num_classes
        )));
    }
    Ok(())
}

/// Train from a fresh initialization drawn from `config.seed`.
pub fn train(
    model: &Model,
    train_set: &FeatureSet,
    test_set: &FeatureSet,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with(model, train_set, test_set, config, |_| {})
}

/// [`train`], calling `on_epoch` after every epoch.
pub fn train_with(
    model: &Model,
    train_set: &FeatureSet,
    test_set: &FeatureSet,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    check_data(model, train_set, "training")?;
    check_data(model, test_set, "test")?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = model.init_params(&mut rng);
    let mut flat = params.flatten();
    let mut adam = AdamState::new(flat.len());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk
                .iter()
                .map(|&i| {
                    let s = &train_set.samples()[i];
                    (s.features.as_slice(), s.label)
                })
                .collect();
            let grad = batch_gradient(model, &params, &batch)?;
            if !grad.loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "batch loss {} in epoch {epoch}",
                    grad.loss
                )));
            }
            loss_sum += grad.loss * chunk.len() as f64;
            adam.step(&mut flat, &grad.flatten(), lr)?;
            params.assign_flat(&flat);
        }
        let record = EpochRecord {
            epoch,
            mean_train_loss: loss_sum / train_set.len() as f64,
            test_accuracy: model.evaluate(&params, test_set)?.accuracy,
        };
        on_epoch(&record);
        curve.push(record);
    }

    Ok(TrainOutcome {
        seed: config.seed,
        params,
        curve,
        steps: adam.t,
    })
}

/// `config.repeats` independent runs seeded `seed, seed + 1, …`.
pub fn run_repeats(
    model: &Model,
    train_set: &FeatureSet,
    test_set: &FeatureSet,
    config: &TrainConfig,
) -> Result<Vec<TrainOutcome>> {
    config.validate()?;
    (0..config.repeats as u64)
        .map(|r| {
            let run = TrainConfig {
                seed: config.seed.wrapping_add(r),
                ..config.clone()
            };
            train(model, train_set, test_set, &run)
        })
        .collect()
}
