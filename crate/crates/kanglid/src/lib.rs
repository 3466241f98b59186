//! Word-level language identification for code-mixed Kannada-English text.
//!
//! Every word of a social-media comment gets one of six tags: `kn`, `en`,
//! `en-kn`, `name`, `location`, or `other`. The pipeline embeds a word as a
//! sequence of subword vectors, runs the sequence through a masked LSTM,
//! and classifies the final hidden state with a batch-normalized softmax
//! head. Training, evaluation, and plotting are all deterministic given a
//! seed, so every run is reproducible from its persisted config snapshot.
//!
//! Modules, in pipeline order:
//!
//! - [`corpus`]: the tag scheme, TSV/CSV loading, stratified splitting, and
//!   distribution statistics.
//! - [`embedding`]: the backend registry, subword tokenization, an offline
//!   character-trigram hash backend, and padded batch assembly.
//! - [`classifier`]: the LSTM model, Adam training loop with early
//!   stopping, and JSON checkpoints.
//! - [`evaluation`]: confusion matrices, per-class and averaged
//!   precision/recall/F1, and ranked leaderboards.
//! - [`plot`]: SVG loss/accuracy curves and distribution bar charts.
//! - [`cli`]: run configuration and the five batch commands behind the
//!   `kanglid` binary (`train`, `predict`, `evaluate`, `stats`, `plot`).
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example corpus_stats
//! cargo run --example embed_words
//! cargo run --example train_synthetic
//! cargo run --example evaluate_predictions
//! cargo run --example rank_teams
//! cargo run --example plot_history
//! cargo run --example full_pipeline
//! ```

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod plot;

pub use error::{Error, Result};
