use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kanglid::cli::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "kanglid",
    version,
    about = "Word-level language identification for code-mixed Kannada-English text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier; writes a checkpoint, history, and config snapshot
    Train(TrainArgs),
    /// Tag each word of an input file using a trained checkpoint
    Predict(PredictArgs),
    /// Score a predictions file against gold labels
    Evaluate(EvaluateArgs),
    /// Report per-tag counts and percentages of a corpus
    Stats(StatsArgs),
    /// Render loss and accuracy curves from a training history
    Plot(PlotArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus, TSV or CSV (overrides the config file's train_file)
    train_file: Option<PathBuf>,
    /// TOML run-configuration file; flags win over its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Embedding backend name (e.g. hash, hash-128, bert-base-uncased)
    #[arg(long)]
    backend: Option<String>,
    /// Seed for splitting, initialization, shuffling, and dropout
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving checkpoint, history, and snapshot
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Directory holding pretrained weight bundles
    #[arg(long)]
    weights_cache: Option<PathBuf>,
    /// Fraction of the corpus held out for validation, in (0,1)
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Epochs without validation improvement before stopping
    #[arg(long)]
    patience: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Checkpoint written by `train`
    checkpoint: PathBuf,
    /// Input file, one word per line (text after a tab is ignored)
    input: PathBuf,
    /// Directory receiving predictions.tsv
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Directory holding pretrained weight bundles
    #[arg(long)]
    weights_cache: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold-labeled file (word<TAB>tag)
    gold: PathBuf,
    /// Predictions file (word<TAB>tag)
    predictions: PathBuf,
    /// Directory receiving evaluation.txt
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Labeled corpus, TSV or CSV
    corpus: PathBuf,
    /// Directory receiving stats.txt and distribution.svg
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// history.json written by `train`
    history: PathBuf,
    /// Directory receiving loss.svg and accuracy.svg
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly when the reader goes away (`kanglid stats … | head`), like
    // the rest of the Unix toolbox; Rust's default turns EPIPE into a panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(u8::try_from(err.exit_code()).unwrap_or(1))
        }
    }
}

fn run(cli: Cli) -> kanglid::Result<()> {
    match cli.command {
        Command::Train(args) => {
            let file_cfg = match &args.config {
                Some(path) => RunConfig::from_file(path)?,
                None => RunConfig::default(),
            };
            let flags = RunConfig {
                train_file: args.train_file,
                backend: args.backend,
                seed: args.seed,
                output_dir: args.output_dir,
                weights_cache: args.weights_cache,
                val_fraction: args.val_fraction,
                patience: args.patience,
                ..RunConfig::default()
            };
            let run = flags.merged_over(file_cfg).resolve()?;
            let artifacts = cli::cmd_train(&run)?;
            print!("{}", artifacts.model_summary);
            let history = &artifacts.history;
            if let Some(last) = history.records.last() {
                println!(
                    "stopped after epoch {} (best {}): val loss {:.4}, val accuracy {:.4}",
                    history.stopped_epoch, history.best_epoch, last.val_loss, last.val_accuracy
                );
            }
            println!("checkpoint: {}", artifacts.checkpoint.display());
            println!("history:    {}", artifacts.history_file.display());
            println!("config:     {}", artifacts.snapshot.display());
            if let Some(report) = &artifacts.test_report {
                println!("test set:   {}", report.display());
            }
            Ok(())
        }
        Command::Predict(args) => {
            let out_dir = args.output_dir.unwrap_or_else(cli::default_output_dir);
            std::fs::create_dir_all(&out_dir)?;
            let output = out_dir.join(cli::PREDICTIONS_FILE);
            let cache = cli::weights_cache_or_env(args.weights_cache);
            let summary =
                cli::cmd_predict(&args.checkpoint, &args.input, &output, cache.as_deref())?;
            if summary.fallback_words > 0 {
                eprintln!(
                    "warning: {} word(s) could not be read and were tagged \"other\"",
                    summary.fallback_words
                );
            }
            println!("tagged {} word(s): {}", summary.words, output.display());
            Ok(())
        }
        Command::Evaluate(args) => {
            let out_dir = args.output_dir.unwrap_or_else(cli::default_output_dir);
            std::fs::create_dir_all(&out_dir)?;
            let output = out_dir.join(cli::EVALUATION_FILE);
            let report = cli::cmd_evaluate(&args.gold, &args.predictions, &output)?;
            print!("{}", report.render());
            println!("report: {}", output.display());
            Ok(())
        }
        Command::Stats(args) => {
            let out_dir = args.output_dir.unwrap_or_else(cli::default_output_dir);
            std::fs::create_dir_all(&out_dir)?;
            let report = out_dir.join(cli::STATS_FILE);
            let chart = out_dir.join(cli::DISTRIBUTION_CHART_FILE);
            let stats = cli::cmd_stats(&args.corpus, &report, Some(&chart))?;
            print!("{}", stats.render());
            println!("report: {}", report.display());
            println!("chart:  {}", chart.display());
            Ok(())
        }
        Command::Plot(args) => {
            let out_dir = args.output_dir.unwrap_or_else(cli::default_output_dir);
            std::fs::create_dir_all(&out_dir)?;
            let loss = out_dir.join(cli::LOSS_CHART_FILE);
            let accuracy = out_dir.join(cli::ACCURACY_CHART_FILE);
            let history = cli::cmd_plot(&args.history, &loss, &accuracy)?;
            println!(
                "plotted {} epoch(s): {}, {}",
                history.records.len(),
                loss.display(),
                accuracy.display()
            );
            Ok(())
        }
    }
}
