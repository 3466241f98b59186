//! Run configuration and the five batch commands behind the command-line
//! interface: train, predict, evaluate, stats, and plot.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{
    load_checkpoint, save_checkpoint, DropoutPlacement, EncodedDataset, Model, ModelSpec,
    TrainingConfig, TrainingHistory,
};
use crate::corpus::{
    compute_distribution, load_corpus, split_corpus, CorpusFormat, DistributionStats, Tag,
    TagScheme,
};
use crate::embedding::{load_backend_by_name, DEFAULT_MAX_SUBWORDS};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluationReport, LabelSet};
use crate::plot;

/// Consulted for the weight-cache directory when no flag or config key set one.
pub const WEIGHTS_CACHE_ENV: &str = "KANGLID_WEIGHTS_CACHE";

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.json";
pub const CONFIG_SNAPSHOT_FILE: &str = "run-config.toml";
pub const TEST_REPORT_FILE: &str = "test-report.txt";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const EVALUATION_FILE: &str = "evaluation.txt";
pub const STATS_FILE: &str = "stats.txt";
pub const DISTRIBUTION_CHART_FILE: &str = "distribution.svg";
pub const LOSS_CHART_FILE: &str = "loss.svg";
pub const ACCURACY_CHART_FILE: &str = "accuracy.svg";

pub fn default_output_dir() -> PathBuf {
    PathBuf::from("kanglid-run")
}

/// Flat key/value run settings. Unset keys fall back to the published
/// training recipe when resolved.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train_file: Option<PathBuf>,
    pub test_file: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub weights_cache: Option<PathBuf>,
    pub backend: Option<String>,
    pub seed: Option<u64>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub val_fraction: Option<f64>,
    pub lstm_hidden: Option<usize>,
    pub dropout: Option<f64>,
    pub batch_norm: Option<bool>,
    pub max_subwords: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        if !path.exists() {
            return Err(Error::MissingFile {
                path: path.to_path_buf(),
            });
        }
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config {
            reason: format!("{}: {e}", path.display()),
        })
    }

    /// Key-by-key overlay; `self` wins over `base`.
    pub fn merged_over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            train_file: self.train_file.or(base.train_file),
            test_file: self.test_file.or(base.test_file),
            output_dir: self.output_dir.or(base.output_dir),
            weights_cache: self.weights_cache.or(base.weights_cache),
            backend: self.backend.or(base.backend),
            seed: self.seed.or(base.seed),
            learning_rate: self.learning_rate.or(base.learning_rate),
            batch_size: self.batch_size.or(base.batch_size),
            max_epochs: self.max_epochs.or(base.max_epochs),
            patience: self.patience.or(base.patience),
            val_fraction: self.val_fraction.or(base.val_fraction),
            lstm_hidden: self.lstm_hidden.or(base.lstm_hidden),
            dropout: self.dropout.or(base.dropout),
            batch_norm: self.batch_norm.or(base.batch_norm),
            max_subwords: self.max_subwords.or(base.max_subwords),
        }
    }

    /// Fill the gaps with defaults and validate. The weight cache honors
    /// [`WEIGHTS_CACHE_ENV`] when neither a flag nor a config key set it.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        self.resolve_with(std::env::var_os(WEIGHTS_CACHE_ENV).map(PathBuf::from))
    }

    pub fn resolve_with(&self, env_weights_cache: Option<PathBuf>) -> Result<ResolvedRun> {
        let train_file = self.train_file.clone().ok_or_else(|| Error::Config {
            reason: "train_file is required (positional argument or config key)".to_string(),
        })?;
        let defaults = TrainingConfig::default();
        let spec_defaults = ModelSpec::for_input(1);
        let resolved = ResolvedRun {
            train_file,
            test_file: self.test_file.clone(),
            output_dir: self.output_dir.clone().unwrap_or_else(default_output_dir),
            weights_cache: self.weights_cache.clone().or(env_weights_cache),
            backend: self.backend.clone().unwrap_or_else(|| "hash".to_string()),
            seed: self.seed.unwrap_or(defaults.seed),
            learning_rate: self.learning_rate.unwrap_or(defaults.learning_rate),
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            max_epochs: self.max_epochs.unwrap_or(defaults.max_epochs),
            patience: self.patience.unwrap_or(defaults.early_stopping_patience),
            val_fraction: self.val_fraction.unwrap_or(0.1),
            lstm_hidden: self.lstm_hidden.unwrap_or(spec_defaults.lstm_hidden),
            dropout: self.dropout.unwrap_or(spec_defaults.dropout_rate),
            batch_norm: self.batch_norm.unwrap_or(spec_defaults.batch_norm),
            max_subwords: self.max_subwords.unwrap_or(DEFAULT_MAX_SUBWORDS),
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

/// A fully specified training run. Serializing it yields a config snapshot
/// that parses back as a [`RunConfig`] with every key set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub train_file: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights_cache: Option<PathBuf>,
    pub backend: String,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub lstm_hidden: usize,
    pub dropout: f64,
    pub batch_norm: bool,
    pub max_subwords: usize,
}

impl ResolvedRun {
    pub fn validate(&self) -> Result<()> {
        self.training_config().validate()?;
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::Config {
                reason: format!("val_fraction must be in (0,1), got {}", self.val_fraction),
            });
        }
        if self.max_subwords == 0 {
            return Err(Error::Config {
                reason: "max_subwords must be positive".to_string(),
            });
        }
        Ok(())
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            early_stopping_patience: self.patience,
            seed: self.seed,
        }
    }

    pub fn model_spec(&self, input_size: usize) -> ModelSpec {
        ModelSpec {
            input_size,
            lstm_hidden: self.lstm_hidden,
            dropout_rate: self.dropout,
            num_classes: Tag::COUNT,
            batch_norm: self.batch_norm,
            dropout_placement: DropoutPlacement::default(),
        }
    }

    pub fn snapshot_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config {
            reason: format!("cannot serialize run config: {e}"),
        })
    }
}

/// Flag-absent fallback to the weight-cache environment variable.
pub fn weights_cache_or_env(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(WEIGHTS_CACHE_ENV).map(PathBuf::from))
}

#[derive(Debug)]
pub struct TrainArtifacts {
    pub checkpoint: PathBuf,
    pub history_file: PathBuf,
    pub snapshot: PathBuf,
    pub test_report: Option<PathBuf>,
    pub history: TrainingHistory,
    pub model_summary: String,
}

/// Train per the resolved run and write checkpoint, history, and the
/// resolved-config snapshot under its output directory.
pub fn cmd_train(run: &ResolvedRun) -> Result<TrainArtifacts> {
    run.validate()?;
    require_file(&run.train_file)?;
    let corpus = load_corpus(&run.train_file, CorpusFormat::from_path(&run.train_file))?;
    let backend = load_backend_by_name(&run.backend, run.weights_cache.as_deref())?;
    let scheme = TagScheme::canonical();

    fs::create_dir_all(&run.output_dir)?;
    let snapshot = run.output_dir.join(CONFIG_SNAPSHOT_FILE);
    fs::write(&snapshot, run.snapshot_toml()?)?;

    let (train_set, val_set) = split_corpus(&corpus, run.val_fraction, run.seed, true)?;
    let train_ds = EncodedDataset::encode(&train_set, backend.as_ref(), &scheme, run.max_subwords)?;
    let val_ds = EncodedDataset::encode(&val_set, backend.as_ref(), &scheme, run.max_subwords)?;

    let model = Model::new(
        run.model_spec(backend.hidden_size()),
        scheme.clone(),
        backend.name(),
        run.max_subwords,
        run.seed,
    )?;
    let model_summary = model.summary();
    let (trained, history) = model.train(&train_ds, &val_ds, &run.training_config())?;

    let checkpoint = run.output_dir.join(CHECKPOINT_FILE);
    save_checkpoint(&trained, &run.training_config(), &checkpoint)?;
    let history_file = run.output_dir.join(HISTORY_FILE);
    fs::write(&history_file, history.to_json())?;

    let test_report = match &run.test_file {
        Some(test_file) => {
            require_file(test_file)?;
            let test = load_corpus(test_file, CorpusFormat::from_path(test_file))?;
            let words: Vec<&str> = test.words().collect();
            let pred = trained.classify_all(backend.as_ref(), &words, run.batch_size)?;
            let gold: Vec<Tag> = test.tags().collect();
            let report = EvaluationReport::from_pairs(&gold, &pred, LabelSet::PresentInGold)?;
            let path = run.output_dir.join(TEST_REPORT_FILE);
            fs::write(&path, report.render())?;
            Some(path)
        }
        None => None,
    };

    Ok(TrainArtifacts {
        checkpoint,
        history_file,
        snapshot,
        test_report,
        history,
        model_summary,
    })
}

#[derive(Debug)]
pub struct PredictSummary {
    /// Lines written, equal to the input line count.
    pub words: usize,
    /// Inputs that could not be read as a word and fell back to "other".
    pub fallback_words: usize,
}

/// Tag every line of `input` with the checkpoint's model, one output line
/// per input line in input order. A line's word is the text before the
/// first tab; an empty word cannot be embedded and falls back to "other".
pub fn cmd_predict(
    checkpoint: &Path,
    input: &Path,
    output: &Path,
    weights_cache: Option<&Path>,
) -> Result<PredictSummary> {
    let (model, train_cfg) = load_checkpoint(checkpoint, &TagScheme::canonical())?;
    require_file(input)?;
    let text = fs::read_to_string(input)?;
    let words: Vec<&str> = text
        .lines()
        .map(|line| line.split('\t').next().unwrap_or("").trim())
        .collect();
    if words.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let valid: Vec<&str> = words.iter().copied().filter(|w| !w.is_empty()).collect();
    let backend = load_backend_by_name(model.backend_name(), weights_cache)?;
    let mut tagged = model
        .classify_all(backend.as_ref(), &valid, train_cfg.batch_size)?
        .into_iter();

    let mut out = String::new();
    let mut fallback_words = 0;
    for word in &words {
        let tag = if word.is_empty() {
            fallback_words += 1;
            Tag::Other
        } else {
            tagged.next().expect("one tag per valid word")
        };
        out.push_str(word);
        out.push('\t');
        out.push_str(tag.name());
        out.push('\n');
    }
    fs::write(output, out)?;
    Ok(PredictSummary {
        words: words.len(),
        fallback_words,
    })
}

/// Score a predictions file against gold labels, line-aligned, and write
/// the evaluation report.
pub fn cmd_evaluate(gold: &Path, predictions: &Path, output: &Path) -> Result<EvaluationReport> {
    require_file(gold)?;
    require_file(predictions)?;
    let gold_corpus = load_corpus(gold, CorpusFormat::from_path(gold))?;
    let pred_corpus = load_corpus(predictions, CorpusFormat::from_path(predictions))?;
    let gold_tags: Vec<Tag> = gold_corpus.tags().collect();
    let pred_tags: Vec<Tag> = pred_corpus.tags().collect();
    let report = EvaluationReport::from_pairs(&gold_tags, &pred_tags, LabelSet::PresentInGold)?;
    fs::write(output, report.render())?;
    Ok(report)
}

/// Per-tag counts and percentages of a corpus, as a report file and an
/// optional bar chart.
pub fn cmd_stats(
    corpus: &Path,
    report_out: &Path,
    chart_out: Option<&Path>,
) -> Result<DistributionStats> {
    require_file(corpus)?;
    let loaded = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
    let stats = compute_distribution(&loaded)?;
    fs::write(report_out, stats.render())?;
    if let Some(chart) = chart_out {
        plot::plot_distribution(&stats, chart)?;
    }
    Ok(stats)
}

/// Loss and accuracy curves from a history file.
pub fn cmd_plot(history: &Path, loss_out: &Path, accuracy_out: &Path) -> Result<TrainingHistory> {
    require_file(history)?;
    let parsed = TrainingHistory::from_json(&fs::read_to_string(history)?)?;
    plot::plot_loss_curve(&parsed, loss_out)?;
    plot::plot_accuracy_curve(&parsed, accuracy_out)?;
    Ok(parsed)
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingFile {
            path: path.to_path_buf(),
        })
    }
}
