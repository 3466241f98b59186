//! Self-describing model checkpoints.
//!
//! A checkpoint is one JSON file carrying a version field, the architecture,
//! the training configuration, the tag scheme order, the backend identity,
//! the init seed and every parameter tensor. Loading validates all of it;
//! a checkpoint that parses but disagrees with its own spec is rejected
//! rather than trusted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TagScheme;
use crate::error::{Error, Result};

use super::net::Params;
use super::train::TrainingConfig;
use super::{ModelSpec, TrainedModel};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    backend: String,
    seed: u64,
    max_subwords: usize,
    spec: ModelSpec,
    scheme: Vec<String>,
    training: TrainingConfig,
    params: Params,
}

/// Write `model` (and the config that produced it) to `path` as JSON.
pub fn save_checkpoint(model: &TrainedModel, training: &TrainingConfig, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        backend: model.backend.clone(),
        seed: model.seed,
        max_subwords: model.max_subwords,
        spec: model.spec.clone(),
        scheme: model.scheme.names().to_vec(),
        training: training.clone(),
        params: model.params.clone(),
    };
    let json = serde_json::to_string(&file).expect("checkpoint serializes");
    std::fs::write(path, json)?;
    Ok(())
}

fn corrupt(reason: impl Into<String>) -> Error {
    Error::CorruptCheckpoint {
        reason: reason.into(),
    }
}

/// Load a checkpoint and validate it against the expected tag scheme.
///
/// Serialized f64 values round-trip exactly, so the loaded model's
/// predictions match the saved model's bit for bit.
pub fn load_checkpoint(
    path: &Path,
    expected_scheme: &TagScheme,
) -> Result<(TrainedModel, TrainingConfig)> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;

    if file.version != CHECKPOINT_VERSION {
        return Err(corrupt(format!(
            "version {} not supported (expected {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    let found = TagScheme::from_names(file.scheme.clone());
    if &found != expected_scheme {
        return Err(Error::SchemeMismatch {
            expected: expected_scheme.names().join(", "),
            found: file.scheme.join(", "),
        });
    }
    file.spec
        .validate()
        .map_err(|e| corrupt(format!("invalid spec: {e}")))?;
    if file.spec.num_classes != found.len() {
        return Err(corrupt(format!(
            "spec declares {} classes but the scheme holds {}",
            file.spec.num_classes,
            found.len()
        )));
    }
    if file.max_subwords == 0 {
        return Err(corrupt("max_subwords is zero"));
    }
    validate_shapes(&file.spec, &file.params)?;
    file.training
        .validate()
        .map_err(|e| corrupt(format!("invalid training config: {e}")))?;

    Ok((
        TrainedModel {
            spec: file.spec,
            scheme: found,
            backend: file.backend,
            max_subwords: file.max_subwords,
            seed: file.seed,
            params: file.params,
        },
        file.training,
    ))
}

fn validate_shapes(spec: &ModelSpec, params: &Params) -> Result<()> {
    let (d, h, c) = (spec.input_size, spec.lstm_hidden, spec.num_classes);
    let checks: [(&str, bool); 6] = [
        ("lstm input weights", params.lstm.w_ih.dim() == (d, 4 * h)),
        (
            "lstm recurrent weights",
            params.lstm.w_hh.dim() == (h, 4 * h),
        ),
        ("lstm bias", params.lstm.b.len() == 4 * h),
        (
            "batch norm presence",
            params.batch_norm.is_some() == spec.batch_norm,
        ),
        ("output weights", params.output.w.dim() == (h, c)),
        ("output bias", params.output.b.len() == c),
    ];
    for (what, ok) in checks {
        if !ok {
            return Err(corrupt(format!("{what} disagree with the spec")));
        }
    }
    if let Some(bn) = &params.batch_norm {
        let lens = [
            bn.gamma.len(),
            bn.beta.len(),
            bn.running_mean.len(),
            bn.running_var.len(),
        ];
        if lens.iter().any(|&l| l != h) {
            return Err(corrupt("batch norm tensors disagree with the spec"));
        }
    }
    let all = [
        params.lstm.w_ih.iter(),
        params.lstm.w_hh.iter(),
        params.output.w.iter(),
    ];
    for tensor in all {
        for &v in tensor {
            if !v.is_finite() {
                return Err(corrupt("non-finite parameter value"));
            }
        }
    }
    Ok(())
}
