//! Corpus to charts: train, predict, evaluate, stats, and plot in one run,
//! driven through the same entry points as the command-line interface.

use std::fmt::Write as _;
use std::fs;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kanglid::cli::{self, RunConfig};

fn write_corpus(path: &std::path::Path, per_tag: usize, seed: u64) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vowels: Vec<char> = "aeiou".chars().collect();
    let consonants: Vec<char> = "kstnr".chars().collect();
    let mut word = |alphabet: &[char]| -> String {
        let len = rng.random_range(3..8);
        (0..len)
            .map(|_| *alphabet.choose(&mut rng).unwrap())
            .collect()
    };
    let mut text = String::new();
    for _ in 0..per_tag {
        writeln!(text, "{}\tkn", word(&vowels)).unwrap();
        writeln!(text, "{}\ten", word(&consonants)).unwrap();
    }
    fs::write(path, text)
}

fn main() -> kanglid::Result<()> {
    let dir = std::env::temp_dir().join("kanglid-pipeline");
    fs::create_dir_all(&dir)?;
    let train_file = dir.join("train.tsv");
    let test_file = dir.join("test.tsv");
    write_corpus(&train_file, 120, 29)?;
    write_corpus(&test_file, 20, 31)?;

    let run = RunConfig {
        train_file: Some(train_file),
        test_file: Some(test_file.clone()),
        output_dir: Some(dir.clone()),
        backend: Some("hash-32".to_string()),
        seed: Some(29),
        learning_rate: Some(3e-3),
        batch_size: Some(16),
        max_epochs: Some(12),
        val_fraction: Some(0.2),
        lstm_hidden: Some(16),
        max_subwords: Some(8),
        ..RunConfig::default()
    }
    .resolve()?;

    let artifacts = cli::cmd_train(&run)?;
    let last = artifacts.history.records.last().unwrap();
    println!(
        "trained {} epoch(s), val accuracy {:.3}",
        artifacts.history.stopped_epoch, last.val_accuracy
    );
    println!("  checkpoint {}", artifacts.checkpoint.display());
    println!("  snapshot   {}", artifacts.snapshot.display());

    let predictions = dir.join(cli::PREDICTIONS_FILE);
    let summary = cli::cmd_predict(&artifacts.checkpoint, &test_file, &predictions, None)?;
    println!("tagged {} test word(s)", summary.words);

    let report = cli::cmd_evaluate(&test_file, &predictions, &dir.join(cli::EVALUATION_FILE))?;
    println!("test weighted F1 {:.3}", report.weighted.f1);

    cli::cmd_stats(
        &test_file,
        &dir.join(cli::STATS_FILE),
        Some(&dir.join(cli::DISTRIBUTION_CHART_FILE)),
    )?;
    cli::cmd_plot(
        &artifacts.history_file,
        &dir.join(cli::LOSS_CHART_FILE),
        &dir.join(cli::ACCURACY_CHART_FILE),
    )?;
    println!("charts and reports under {}", dir.display());
    Ok(())
}
