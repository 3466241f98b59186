//! The training loop: Adam over mini-batches with early stopping on
//! validation loss and best-epoch weight restoration.
//!
//! Defaults follow the published recipe: learning rate 1e-4, batch size 64,
//! at most 30 epochs, patience 3. Everything is driven by one seed; two runs
//! with identical config, data and backend produce identical histories.

use ndarray::{Array2, Array3, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledCorpus, TagScheme};
use crate::embedding::{EmbeddingBackend, WordEmbedding};
use crate::error::{Error, Result};

use super::net::{self, Grads, Params};

fn default_learning_rate() -> f64 {
    1e-4
}
fn default_batch_size() -> usize {
    64
}
fn default_max_epochs() -> usize {
    30
}
fn default_patience() -> usize {
    3
}

/// Optimizer hyperparameters. Adam is the only optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub early_stopping_patience: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: default_learning_rate(),
            batch_size: default_batch_size(),
            max_epochs: default_max_epochs(),
            early_stopping_patience: default_patience(),
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::Config { reason });
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".to_string());
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be positive".to_string());
        }
        if self.early_stopping_patience == 0 {
            return fail("early_stopping_patience must be positive".to_string());
        }
        Ok(())
    }
}

/// A corpus embedded once and frozen: per-word subword vectors plus class
/// indices against a fixed scheme.
pub struct EncodedDataset {
    items: Vec<(WordEmbedding, usize)>,
    num_classes: usize,
    max_subwords: usize,
    /// Words whose subword sequences were cut to `max_subwords`.
    pub truncated: usize,
}

impl EncodedDataset {
    pub fn encode(
        corpus: &LabeledCorpus,
        backend: &dyn EmbeddingBackend,
        scheme: &TagScheme,
        max_subwords: usize,
    ) -> Result<EncodedDataset> {
        if corpus.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut items = Vec::with_capacity(corpus.len());
        let mut truncated = 0;
        for token in corpus.items() {
            let embedding = backend.embed_word(token.word())?;
            if embedding.n_subwords() > max_subwords {
                truncated += 1;
            }
            let class = scheme
                .index_of(token.tag().name())
                .ok_or_else(|| Error::UnknownTag {
                    tag: token.tag().name().to_string(),
                    line: None,
                })?;
            items.push((embedding, class));
        }
        Ok(EncodedDataset {
            items,
            num_classes: scheme.len(),
            max_subwords,
            truncated,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Embedding width shared by every item.
    pub fn hidden_size(&self) -> usize {
        self.items[0].0.hidden_size()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Pad the selected items into (vectors, mask, one-hot targets).
    fn batch(&self, indices: &[usize]) -> (Array3<f64>, Array2<f64>, Array2<f64>) {
        let steps = indices
            .iter()
            .map(|&i| self.items[i].0.n_subwords().min(self.max_subwords))
            .max()
            .unwrap();
        let hidden = self.items[indices[0]].0.hidden_size();
        let mut vectors = Array3::zeros((indices.len(), steps, hidden));
        let mut mask = Array2::zeros((indices.len(), steps));
        let mut targets = Array2::zeros((indices.len(), self.num_classes));
        for (row, &i) in indices.iter().enumerate() {
            let (embedding, class) = &self.items[i];
            let kept = embedding.n_subwords().min(self.max_subwords);
            for t in 0..kept {
                vectors
                    .slice_mut(ndarray::s![row, t, ..])
                    .assign(&embedding.vectors().row(t));
                mask[[row, t]] = 1.0;
            }
            targets[[row, *class]] = 1.0;
        }
        (vectors, mask, targets)
    }

    fn class_indices(&self) -> Vec<usize> {
        self.items.iter().map(|(_, c)| *c).collect()
    }
}

/// Adam with bias correction; one moment pair per trainable tensor.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, params: &mut Params) -> Adam {
        let shapes: Vec<usize> = params.flat_mut().iter().map(|s| s.len()).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Grads) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let tensors = params.flat_mut();
        let grad_tensors = grads.flat();
        debug_assert_eq!(tensors.len(), grad_tensors.len());
        for ((tensor, grad), (m, v)) in tensors
            .into_iter()
            .zip(grad_tensors)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for j in 0..tensor.len() {
                let g = grad[j];
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                tensor[j] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

/// What the early stopper said about the epoch just observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    NoImprovement { bad_epochs: usize },
    Stop,
}

/// Minimum-mode early stopping: halt after `patience` consecutive epochs
/// without a strict improvement of the observed loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best_loss: f64,
    best_epoch: usize,
    bad_epochs: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> EarlyStopping {
        EarlyStopping {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            bad_epochs: 0,
        }
    }

    /// Feed one epoch's validation loss. Epochs are 1-based.
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best_loss {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
            self.bad_epochs = 0;
            StopDecision::Improved
        } else {
            self.bad_epochs += 1;
            if self.bad_epochs >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::NoImprovement {
                    bad_epochs: self.bad_epochs,
                }
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }
}

/// One epoch's summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Per-epoch metrics of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch with the lowest validation loss (1-based).
    pub best_epoch: usize,
    /// Last epoch that ran (1-based).
    pub stopped_epoch: usize,
}

impl TrainingHistory {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("history serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainingHistory> {
        let history: TrainingHistory =
            serde_json::from_str(text).map_err(|e| Error::MalformedHistory {
                reason: e.to_string(),
            })?;
        if history.records.is_empty() {
            return Err(Error::MalformedHistory {
                reason: "no epoch records".to_string(),
            });
        }
        Ok(history)
    }
}

fn argmax_row(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in row.iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

fn accuracy(probs: &Array2<f64>, classes: &[usize]) -> f64 {
    let hits = probs
        .axis_iter(Axis(0))
        .zip(classes)
        .filter(|(row, &c)| argmax_row(row.view()) == c)
        .count();
    hits as f64 / classes.len() as f64
}

/// Mean evaluation loss and accuracy over a dataset, batched.
pub fn evaluate_dataset(
    params: &Params,
    data: &EncodedDataset,
    batch_size: usize,
) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut loss_sum = 0.0;
    let mut hit_sum = 0.0;
    for chunk in indices.chunks(batch_size) {
        let (vectors, mask, targets) = data.batch(chunk);
        let (loss, probs) = net::eval_loss(params, &vectors, &mask, &targets);
        loss_sum += loss * chunk.len() as f64;
        let classes: Vec<usize> = chunk.iter().map(|&i| data.items[i].1).collect();
        hit_sum += accuracy(&probs, &classes) * chunk.len() as f64;
    }
    Ok((loss_sum / data.len() as f64, hit_sum / data.len() as f64))
}

pub(super) struct TrainOutcome {
    pub params: Params,
    pub history: TrainingHistory,
}

/// Core loop shared by the public `Model::train`. Mutates `params` in place
/// and returns the best-epoch snapshot.
pub(super) fn run_training(
    mut params: Params,
    dropout_rate: f64,
    placement: net::DropoutPlacement,
    train: &EncodedDataset,
    val: &EncodedDataset,
    cfg: &TrainingConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(cfg.learning_rate, &mut params);
    let mut stopper = EarlyStopping::new(cfg.early_stopping_patience);
    let mut records = Vec::new();
    let mut best: Option<(Params, usize)> = None;

    let train_classes = train.class_indices();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut hit_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let (vectors, mask, targets) = train.batch(chunk);
            let dropout = (dropout_rate > 0.0).then(|| {
                net::dropout_mask(&mut rng, chunk.len(), params.hidden_size(), dropout_rate)
            });
            let (loss, cache) =
                net::forward_train(&params, &vectors, &mask, dropout, placement, &targets);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            let classes: Vec<usize> = chunk.iter().map(|&i| train_classes[i]).collect();
            hit_sum += accuracy(cache.probs(), &classes) * chunk.len() as f64;

            let grads = net::backward(&params, &cache, &targets);
            adam.step(&mut params, &grads);
            if let (Some(bn), Some(mean), Some(var)) = (
                params.batch_norm.as_mut(),
                &cache.batch_mean,
                &cache.batch_var,
            ) {
                bn.update_running(mean, var);
            }
        }

        let train_loss = loss_sum / train.len() as f64;
        let train_accuracy = hit_sum / train.len() as f64;
        let (val_loss, val_accuracy) = evaluate_dataset(&params, val, cfg.batch_size)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        records.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });

        let decision = stopper.observe(epoch, val_loss);
        if decision == StopDecision::Improved {
            best = Some((params.clone(), epoch));
        }
        if decision == StopDecision::Stop {
            break;
        }
    }

    let (best_params, best_epoch) = best.expect("at least one epoch improved on infinity");
    let stopped_epoch = records.last().expect("at least one epoch ran").epoch;
    Ok(TrainOutcome {
        params: best_params,
        history: TrainingHistory {
            records,
            best_epoch,
            stopped_epoch,
        },
    })
}
