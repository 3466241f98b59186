//! The classification head: an LSTM over each word's subword vectors, then
//! batch normalization, dropout, and a softmax output layer, trained with
//! Adam and early stopping.
//!
//! [`Model`] is the untrained network; [`Model::train`] turns it into a
//! [`TrainedModel`] holding the best-epoch weights, which predicts tags and
//! round-trips through a self-describing checkpoint file.

pub mod checkpoint;
pub mod net;
pub mod train;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Tag, TagScheme};
use crate::embedding::{embed_batch, EmbeddedBatch, EmbeddingBackend, WordEmbedding};
use crate::error::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use net::{DropoutPlacement, Params};
pub use train::{
    evaluate_dataset, Adam, EarlyStopping, EncodedDataset, EpochRecord, StopDecision,
    TrainingConfig, TrainingHistory,
};

fn default_lstm_hidden() -> usize {
    128
}
fn default_dropout() -> f64 {
    0.2
}
fn default_num_classes() -> usize {
    Tag::COUNT
}
fn default_batch_norm() -> bool {
    true
}

/// Architecture of the classification head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Dimensionality of the incoming subword vectors.
    pub input_size: usize,
    #[serde(default = "default_lstm_hidden")]
    pub lstm_hidden: usize,
    #[serde(default = "default_dropout")]
    pub dropout_rate: f64,
    #[serde(default = "default_num_classes")]
    pub num_classes: usize,
    #[serde(default = "default_batch_norm")]
    pub batch_norm: bool,
    #[serde(default)]
    pub dropout_placement: DropoutPlacement,
}

impl ModelSpec {
    /// Spec with all defaults for a given embedding width.
    pub fn for_input(input_size: usize) -> ModelSpec {
        ModelSpec {
            input_size,
            lstm_hidden: default_lstm_hidden(),
            dropout_rate: default_dropout(),
            num_classes: default_num_classes(),
            batch_norm: default_batch_norm(),
            dropout_placement: DropoutPlacement::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidSpec { reason });
        if self.input_size == 0 {
            return fail("input_size must be positive".to_string());
        }
        if self.lstm_hidden == 0 {
            return fail("lstm_hidden must be positive".to_string());
        }
        if self.num_classes == 0 {
            return fail("num_classes must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!(
                "dropout_rate must lie in [0, 1), got {}",
                self.dropout_rate
            ));
        }
        Ok(())
    }
}

/// An initialized, untrained network bound to a tag scheme and a backend
/// identity.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    scheme: TagScheme,
    backend: String,
    max_subwords: usize,
    seed: u64,
    params: Params,
}

impl Model {
    pub fn new(
        spec: ModelSpec,
        scheme: TagScheme,
        backend_name: &str,
        max_subwords: usize,
        seed: u64,
    ) -> Result<Model> {
        spec.validate()?;
        if spec.num_classes != scheme.len() {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "num_classes {} does not match the {}-tag scheme",
                    spec.num_classes,
                    scheme.len()
                ),
            });
        }
        if max_subwords == 0 {
            return Err(Error::InvalidSpec {
                reason: "max_subwords must be positive".to_string(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = Params::init(
            &mut rng,
            spec.input_size,
            spec.lstm_hidden,
            spec.num_classes,
            spec.batch_norm,
        );
        Ok(Model {
            spec,
            scheme,
            backend: backend_name.to_string(),
            max_subwords,
            seed,
            params,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Layer-by-layer description with parameter counts.
    pub fn summary(&self) -> String {
        let s = &self.spec;
        let lstm_params = 4 * s.lstm_hidden * (s.input_size + s.lstm_hidden + 1);
        let dense_params = s.lstm_hidden * s.num_classes + s.num_classes;
        let mut out = String::new();
        out.push_str(&format!(
            "input: (steps <= {}, {})\n",
            self.max_subwords, s.input_size
        ));
        out.push_str(&format!(
            "lstm: hidden {}, params {}\n",
            s.lstm_hidden, lstm_params
        ));
        let emit_bn = |out: &mut String| {
            if s.batch_norm {
                out.push_str(&format!(
                    "batch_norm: features {}, params {}\n",
                    s.lstm_hidden,
                    2 * s.lstm_hidden
                ));
            }
        };
        let emit_dropout = |out: &mut String| {
            if s.dropout_rate > 0.0 {
                out.push_str(&format!("dropout: rate {:.2}\n", s.dropout_rate));
            }
        };
        match s.dropout_placement {
            DropoutPlacement::AfterBatchNorm => {
                emit_bn(&mut out);
                emit_dropout(&mut out);
            }
            DropoutPlacement::BeforeBatchNorm => {
                emit_dropout(&mut out);
                emit_bn(&mut out);
            }
        }
        out.push_str(&format!(
            "dense: {} -> {}, params {}\n",
            s.lstm_hidden, s.num_classes, dense_params
        ));
        out.push_str(&format!("softmax: {} classes\n", s.num_classes));
        out.push_str(&format!(
            "trainable parameters: {}\n",
            self.params.trainable_count()
        ));
        out
    }

    /// Fit on `train`, early-stop on `val`, and return the weights of the
    /// epoch with the lowest validation loss.
    pub fn train(
        self,
        train: &EncodedDataset,
        val: &EncodedDataset,
        cfg: &TrainingConfig,
    ) -> Result<(TrainedModel, TrainingHistory)> {
        for (ds, name) in [(train, "training"), (val, "validation")] {
            if ds.is_empty() {
                return Err(Error::EmptyDataset);
            }
            if ds.hidden_size() != self.spec.input_size {
                return Err(Error::InvalidSpec {
                    reason: format!(
                        "{name} set embeds {} dims, model expects {}",
                        ds.hidden_size(),
                        self.spec.input_size
                    ),
                });
            }
            if ds.num_classes() != self.spec.num_classes {
                return Err(Error::InvalidSpec {
                    reason: format!(
                        "{name} set encodes {} classes, model expects {}",
                        ds.num_classes(),
                        self.spec.num_classes
                    ),
                });
            }
        }
        let outcome = train::run_training(
            self.params,
            self.spec.dropout_rate,
            self.spec.dropout_placement,
            train,
            val,
            cfg,
        )?;
        Ok((
            TrainedModel {
                spec: self.spec,
                scheme: self.scheme,
                backend: self.backend,
                max_subwords: self.max_subwords,
                seed: self.seed,
                params: outcome.params,
            },
            outcome.history,
        ))
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(probs: &Array1<f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in probs.iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Best-epoch weights plus everything needed to reproduce predictions:
/// the architecture, tag scheme order, backend identity and init seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub(crate) spec: ModelSpec,
    pub(crate) scheme: TagScheme,
    pub(crate) backend: String,
    pub(crate) max_subwords: usize,
    pub(crate) seed: u64,
    pub(crate) params: Params,
}

impl TrainedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn scheme(&self) -> &TagScheme {
        &self.scheme
    }

    pub fn backend_name(&self) -> &str {
        &self.backend
    }

    pub fn max_subwords(&self) -> usize {
        self.max_subwords
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_backend(&self, actual: &str) -> Result<()> {
        if actual != self.backend {
            return Err(Error::BackendMismatch {
                expected: self.backend.clone(),
                actual: actual.to_string(),
            });
        }
        Ok(())
    }

    /// Probability of each tag for one embedded word, canonical order.
    pub fn predict_proba(&self, embedding: &WordEmbedding) -> Result<Array1<f64>> {
        self.check_backend(embedding.backend())?;
        let kept = embedding.n_subwords().min(self.max_subwords);
        let mut vectors = ndarray::Array3::zeros((1, kept, embedding.hidden_size()));
        for t in 0..kept {
            vectors
                .slice_mut(ndarray::s![0, t, ..])
                .assign(&embedding.vectors().row(t));
        }
        let mask = ndarray::Array2::ones((1, kept));
        let probs = net::forward_eval(&self.params, &vectors, &mask);
        Ok(probs.row(0).to_owned())
    }

    /// Probabilities for a whole padded batch, one row per word.
    pub fn predict_batch(&self, batch: &EmbeddedBatch) -> Result<ndarray::Array2<f64>> {
        self.check_backend(&batch.backend)?;
        Ok(net::forward_eval(&self.params, &batch.vectors, &batch.mask))
    }

    /// Embed and tag one word.
    pub fn classify(&self, backend: &dyn EmbeddingBackend, word: &str) -> Result<Tag> {
        self.check_backend(backend.name())?;
        let embedding = backend.embed_word(word)?;
        let probs = self.predict_proba(&embedding)?;
        Tag::from_index(argmax(&probs)).ok_or_else(|| Error::InvalidSpec {
            reason: "scheme larger than the tag universe".to_string(),
        })
    }

    /// Tag many words, batching under the hood. Output order matches input.
    pub fn classify_all(
        &self,
        backend: &dyn EmbeddingBackend,
        words: &[&str],
        batch_size: usize,
    ) -> Result<Vec<Tag>> {
        self.check_backend(backend.name())?;
        if words.is_empty() {
            return Ok(Vec::new());
        }
        let mut tags = Vec::with_capacity(words.len());
        for chunk in words.chunks(batch_size.max(1)) {
            let batch = embed_batch(backend, chunk, self.max_subwords)?;
            let probs = self.predict_batch(&batch)?;
            for row in probs.rows() {
                let tag = Tag::from_index(argmax(&row.to_owned())).expect("canonical scheme");
                tags.push(tag);
            }
        }
        Ok(tags)
    }

    /// Mean loss and accuracy over an encoded dataset.
    pub fn evaluate(&self, data: &EncodedDataset, batch_size: usize) -> Result<(f64, f64)> {
        evaluate_dataset(&self.params, data, batch_size)
    }
}
