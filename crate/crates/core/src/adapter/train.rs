use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamState};
use super::infonce::infonce_gradients;
use super::linear::{LinearAdapter, Matrix};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::types::EmbeddingTable;

#[derive(Debug, Clone, PartialEq)]
pub struct AdapterTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub decay_factor: f64,
    /// Fractions of `epochs`; the learning rate decays at `floor(f * epochs)`.
    pub decay_milestones: Vec<f64>,
    pub temperature: f64,
}

impl Default for AdapterTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            batch_size: 256,
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay_factor: 0.1,
            decay_milestones: vec![0.5, 0.75],
            temperature: 0.07,
        }
    }
}

impl AdapterTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, range: &str| Err(Error::config(key, format!("value must be in {range}")));
        if self.epochs < 1 {
            return fail("adapter.epochs", "[1, inf)");
        }
        if self.batch_size < 2 {
            return fail("adapter.batch_size", "[2, inf)");
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return fail("adapter.lr", "[0, inf)");
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return fail("adapter.beta1", "[0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return fail("adapter.beta2", "[0, 1)");
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return fail("adapter.eps", "(0, inf)");
        }
        if !(self.decay_factor.is_finite() && self.decay_factor > 0.0) {
            return fail("adapter.decay_factor", "(0, inf)");
        }
        if self.decay_milestones.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return fail("adapter.decay_milestones", "[0, 1]");
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return fail("adapter.temperature", "(0, inf)");
        }
        Ok(())
    }

    /// Milestones as epoch indices.
    pub fn milestone_epochs(&self) -> Vec<usize> {
        self.decay_milestones.iter().map(|f| (f * self.epochs as f64).floor() as usize).collect()
    }

    fn adam(&self, n_params: usize) -> AdamState {
        AdamState::new(n_params, self.lr, self.beta1, self.beta2, self.eps)
            .with_decay(self.decay_factor, self.milestone_epochs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedAdapters {
    pub image: LinearAdapter,
    pub text: LinearAdapter,
    /// Mean batch loss of every epoch, weighted by batch size.
    pub loss_history: Vec<f64>,
}

/// Split a permutation into batches. A trailing single pair carries no
/// contrastive signal, so it joins the previous batch.
fn batches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(batch_size).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() == 1) {
        out.pop();
        let start = (out.len() - 1) * batch_size;
        *out.last_mut().unwrap() = &order[start..];
    }
    out
}

/// Fit both adapters to the paired rows of `image` and `text`.
///
/// Row `i` of `text` is the text embedding paired with sample `i` (for
/// class-prompt embeddings, the row of the sample's label). Only the adapters
/// change; the input tables are borrowed immutably.
pub fn train_adapters(
    image: &EmbeddingTable,
    text: &EmbeddingTable,
    cfg: &AdapterTrainConfig,
    seed: u64,
) -> Result<TrainedAdapters> {
    cfg.validate()?;
    if image.len() != text.len() {
        return Err(Error::LengthMismatch(format!("{} image rows vs {} text rows", image.len(), text.len())));
    }
    if image.is_empty() {
        return Err(Error::out_of_range("training set", "no pairs"));
    }
    let mut img_adapter = LinearAdapter::identity(image.dim());
    let mut txt_adapter = LinearAdapter::identity(text.dim());
    let mut img_state = cfg.adam(img_adapter.param_count());
    let mut txt_state = cfg.adam(txt_adapter.param_count());
    let mut img_params = img_adapter.params();
    let mut txt_params = txt_adapter.params();

    let n = image.len();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        img_state.begin_epoch(epoch);
        txt_state.begin_epoch(epoch);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, &[tag::ADAPTER, epoch as u64]));
        let mut weighted = 0.0;
        for batch in batches(&order, cfg.batch_size) {
            let xi = Matrix::gather(image, batch);
            let xt = Matrix::gather(text, batch);
            let g = infonce_gradients(&xi, &xt, &img_adapter, &txt_adapter, cfg.temperature)?;
            weighted += g.loss * batch.len() as f64;
            adam_step(&mut img_params, &g.image.flat(), &mut img_state)?;
            adam_step(&mut txt_params, &g.text.flat(), &mut txt_state)?;
            img_adapter.set_params(&img_params)?;
            txt_adapter.set_params(&txt_params)?;
        }
        loss_history.push(weighted / n as f64);
    }
    Ok(TrainedAdapters { image: img_adapter, text: txt_adapter, loss_history })
}
