//! The shipping gate: one test per acceptance criterion, each printing a
//! single `criterion N: PASS/SKIP` line (visible with `--nocapture`).
//!
//! Criteria 1-7 must pass unconditionally. Criterion 8 needs the real
//! training corpus and reports an honest SKIP when it is absent; criterion 9
//! additionally needs pretrained transformer weights and hours of compute,
//! so it is always reported as SKIP here. Criteria 1-8 carry acceptance.

mod common;

use std::time::Instant;

use ndarray::{arr2, Array2, Array3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::{corpus_tsv, flipped_labels, nearest_centroid_accuracy, separable_corpus};
use kanglid::classifier::{
    net, DropoutPlacement, EarlyStopping, EncodedDataset, Model, ModelSpec, StopDecision,
    TrainedModel, TrainingConfig, TrainingHistory,
};
use kanglid::corpus::{
    compute_distribution, load_corpus, split_corpus, CorpusFormat, Tag, TagScheme,
};
use kanglid::embedding::{load_backend_by_name, lookup};
use kanglid::evaluation::{EvaluationReport, LabelSet, RankedLeaderboard};

// ---------------------------------------------------------------------------
// criterion 1: aggregate metrics vs an independent brute-force computation

/// Per-class and averaged scores recomputed directly from the label pairs,
/// sharing no code with the library implementation.
struct BruteForce {
    weighted: (f64, f64, f64),
    macro_avg: (f64, f64, f64),
    per_class: Vec<(Tag, f64, f64, f64)>,
}

fn brute_force(gold: &[Tag], pred: &[Tag], all_six: bool) -> BruteForce {
    let mut per_class = Vec::new();
    let mut members = Vec::new();
    for &tag in &Tag::CANONICAL {
        let tp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == tag && **p == tag)
            .count() as f64;
        let fp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g != tag && **p == tag)
            .count() as f64;
        let fn_ = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == tag && **p != tag)
            .count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let support = tp + fn_;
        per_class.push((tag, precision, recall, f1));
        if all_six || support > 0.0 {
            members.push((precision, recall, f1, support));
        }
    }
    let total_support: f64 = members.iter().map(|m| m.3).sum();
    let weighted = (
        members.iter().map(|m| m.0 * m.3).sum::<f64>() / total_support,
        members.iter().map(|m| m.1 * m.3).sum::<f64>() / total_support,
        members.iter().map(|m| m.2 * m.3).sum::<f64>() / total_support,
    );
    let n = members.len() as f64;
    let macro_avg = (
        members.iter().map(|m| m.0).sum::<f64>() / n,
        members.iter().map(|m| m.1).sum::<f64>() / n,
        members.iter().map(|m| m.2).sum::<f64>() / n,
    );
    BruteForce {
        weighted,
        macro_avg,
        per_class,
    }
}

#[test]
fn criterion_1_metrics_match_brute_force_oracle() {
    const TOLERANCE: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Tag> {
            (0..n)
                .map(|_| *Tag::CANONICAL.choose(rng).unwrap())
                .collect()
        };
        let gold = draw(&mut rng);
        let pred = draw(&mut rng);
        for (label_set, all_six) in [(LabelSet::PresentInGold, false), (LabelSet::AllSix, true)] {
            let report = EvaluationReport::from_pairs(&gold, &pred, label_set).unwrap();
            let oracle = brute_force(&gold, &pred, all_six);
            let pairs = [
                (report.weighted.precision, oracle.weighted.0),
                (report.weighted.recall, oracle.weighted.1),
                (report.weighted.f1, oracle.weighted.2),
                (report.macro_avg.precision, oracle.macro_avg.0),
                (report.macro_avg.recall, oracle.macro_avg.1),
                (report.macro_avg.f1, oracle.macro_avg.2),
            ];
            for (got, want) in pairs {
                let diff = (got - want).abs();
                worst = worst.max(diff);
                assert!(
                    diff < TOLERANCE,
                    "aggregate mismatch: got {got}, oracle {want}, gold {gold:?}, pred {pred:?}"
                );
            }
            for ((tag, p, r, f1), (tag2, scores)) in oracle.per_class.iter().zip(&report.per_class)
            {
                assert_eq!(tag, tag2);
                for (got, want) in [
                    (scores.precision, *p),
                    (scores.recall, *r),
                    (scores.f1, *f1),
                ] {
                    let diff = (got - want).abs();
                    worst = worst.max(diff);
                    assert!(diff < TOLERANCE, "per-class mismatch on {tag}");
                }
            }
        }
    }
    println!("criterion 1: PASS (1000 random sets, worst |diff| {worst:.2e}, tolerance 1e-9)");
}

// ---------------------------------------------------------------------------
// criterion 2: the hand-computed worked example, exact to the last bit

#[test]
fn criterion_2_worked_example_is_exact() {
    let gold = [Tag::Kn, Tag::Kn, Tag::En];
    let pred = [Tag::Kn, Tag::En, Tag::En];
    let report = EvaluationReport::from_pairs(&gold, &pred, LabelSet::PresentInGold).unwrap();

    let kn = report.class(Tag::Kn);
    assert_eq!(kn.precision, 1.0);
    assert_eq!(kn.recall, 0.5);
    assert_eq!(kn.f1, 2.0 / 3.0);

    let en = report.class(Tag::En);
    assert_eq!(en.precision, 0.5);
    assert_eq!(en.recall, 1.0);
    assert_eq!(en.f1, 2.0 / 3.0);

    assert_eq!(report.weighted.f1, 2.0 / 3.0);
    println!("criterion 2: PASS (weighted F1 and both per-class triples exact)");
}

// ---------------------------------------------------------------------------
// criterion 3: leaderboard ranking with a shared rank

#[test]
fn criterion_3_ranking_shares_ranks_on_ties() {
    let board = RankedLeaderboard::from_scores(&[
        ("run-a", 0.86),
        ("run-b", 0.84),
        ("run-c", 0.84),
        ("run-d", 0.83),
    ]);
    let ranks: Vec<usize> = board.rows().iter().map(|r| r.rank).collect();
    assert_eq!(ranks, vec![1, 2, 2, 3]);
    println!("criterion 3: PASS (scores 0.86/0.84/0.84/0.83 rank 1,2,2,3)");
}

// ---------------------------------------------------------------------------
// criterion 4: synthetic convergence under the published recipe

fn convergence_run() -> (TrainedModel, TrainingHistory) {
    let backend = load_backend_by_name("hash", None).unwrap();
    let scheme = TagScheme::canonical();
    let corpus = separable_corpus(100, 41);
    assert_eq!(corpus.len(), 200);
    let (train_c, val_c) = split_corpus(&corpus, 0.2, 17, true).unwrap();
    let train_ds = EncodedDataset::encode(&train_c, backend.as_ref(), &scheme, 16).unwrap();
    let val_ds = EncodedDataset::encode(&val_c, backend.as_ref(), &scheme, 16).unwrap();
    // Default architecture for the 64-dim hash backend: LSTM 128, batch norm
    // on, dropout 0.2. Learning rate is the published 1e-4 scaled by the
    // permitted factor of 10 for the small setup; batch 64, at most 30
    // epochs, patience 3.
    let spec = ModelSpec::for_input(backend.hidden_size());
    assert_eq!(spec.dropout_rate, 0.2);
    assert!(spec.batch_norm);
    let cfg = TrainingConfig {
        learning_rate: 1e-3,
        batch_size: 64,
        max_epochs: 30,
        early_stopping_patience: 3,
        seed: 17,
    };
    let model = Model::new(spec, scheme, backend.name(), 16, 17).unwrap();
    model.train(&train_ds, &val_ds, &cfg).unwrap()
}

#[test]
fn criterion_4_synthetic_training_converges_deterministically() {
    let backend = load_backend_by_name("hash", None).unwrap();
    let corpus = separable_corpus(100, 41);
    let centroid_acc = nearest_centroid_accuracy(backend.as_ref(), &corpus);
    assert!(
        centroid_acc > 0.95,
        "corpus must be separable in embedding space before training is asked to fit it"
    );

    let start = Instant::now();
    let (model_a, history_a) = convergence_run();
    let elapsed = start.elapsed();
    let best_val_acc = history_a
        .records
        .iter()
        .map(|r| r.val_accuracy)
        .fold(0.0, f64::max);
    assert!(
        best_val_acc >= 0.95,
        "validation accuracy peaked at {best_val_acc}"
    );
    let first_good = history_a
        .records
        .iter()
        .find(|r| r.val_accuracy >= 0.95)
        .map(|r| r.epoch)
        .unwrap();
    assert!(
        elapsed.as_secs() < 120,
        "run took {elapsed:?}, budget is two minutes"
    );

    let (model_b, history_b) = convergence_run();
    assert_eq!(history_a, history_b, "same seed must reproduce the history");
    let probe = ["aiea", "eaei", "tsk", "skst"];
    for word in probe {
        let ea = backend.embed_word(word).unwrap();
        let pa = model_a.predict_proba(&ea).unwrap();
        let pb = model_b.predict_proba(&ea).unwrap();
        assert_eq!(pa, pb, "same seed must reproduce predictions for {word}");
    }
    println!(
        "criterion 4: PASS (best val accuracy {best_val_acc:.3}, first >=0.95 at epoch \
         {first_good}, centroid baseline {centroid_acc:.3}, {elapsed:.1?}, reruns identical)"
    );
}

// ---------------------------------------------------------------------------
// criterion 5: early stopping halts patience epochs after best and restores
// the best-epoch weights

#[test]
fn criterion_5_early_stopping_halts_and_restores_best_epoch() {
    // Route one: inject strictly-worsening loss sequences directly into the
    // stopper and check the halt arithmetic for several patience values.
    for patience in 1..=5 {
        let mut stopper = EarlyStopping::new(patience);
        assert_eq!(stopper.observe(1, 0.5), StopDecision::Improved);
        let mut stopped_at = None;
        for epoch in 2..=20 {
            let worsening = 0.5 + 0.1 * (epoch - 1) as f64;
            match stopper.observe(epoch, worsening) {
                StopDecision::Improved => panic!("loss {worsening} is worse than 0.5"),
                StopDecision::NoImprovement { bad_epochs } => {
                    assert_eq!(bad_epochs, epoch - 1);
                }
                StopDecision::Stop => {
                    stopped_at = Some(epoch);
                    break;
                }
            }
        }
        assert_eq!(
            stopped_at,
            Some(1 + patience),
            "patience {patience} must stop exactly patience epochs after the best"
        );
        assert_eq!(stopper.best_epoch(), 1);
    }

    // Route two: the full training loop. Validating on a label-flipped split
    // makes validation loss worsen as training fits the real labels, so the
    // stop fires mid-run; the returned model must then match a run halted at
    // the best epoch exactly.
    let backend = load_backend_by_name("hash-16", None).unwrap();
    let scheme = TagScheme::canonical();
    let train = separable_corpus(20, 5);
    let val = flipped_labels(&separable_corpus(10, 99));
    let train_ds = EncodedDataset::encode(&train, backend.as_ref(), &scheme, 6).unwrap();
    let val_ds = EncodedDataset::encode(&val, backend.as_ref(), &scheme, 6).unwrap();
    let spec = ModelSpec {
        lstm_hidden: 8,
        ..ModelSpec::for_input(16)
    };
    let cfg = TrainingConfig {
        learning_rate: 1e-2,
        batch_size: 8,
        max_epochs: 30,
        early_stopping_patience: 3,
        seed: 3,
    };
    let model = Model::new(spec.clone(), scheme.clone(), "hash-16", 6, 3).unwrap();
    let (stopped_model, history) = model.train(&train_ds, &val_ds, &cfg).unwrap();
    assert!(
        history.stopped_epoch < cfg.max_epochs,
        "early stopping never fired"
    );
    assert_eq!(
        history.stopped_epoch,
        history.best_epoch + cfg.early_stopping_patience,
        "stop must come exactly patience epochs after the best epoch"
    );
    assert_eq!(history.records.len(), history.stopped_epoch);
    let best_loss = history.records[history.best_epoch - 1].val_loss;
    for record in &history.records[history.best_epoch..] {
        assert!(record.val_loss >= best_loss);
    }

    // Same seed, halted at the best epoch: identical weights, so identical
    // probabilities, bit for bit.
    let truncated_cfg = TrainingConfig {
        max_epochs: history.best_epoch,
        ..cfg.clone()
    };
    let model = Model::new(spec, scheme, "hash-16", 6, 3).unwrap();
    let (best_model, truncated_history) = model.train(&train_ds, &val_ds, &truncated_cfg).unwrap();
    assert_eq!(truncated_history.best_epoch, history.best_epoch);
    for item in train.items().iter().take(10) {
        let embedding = backend.embed_word(item.word()).unwrap();
        let from_stopped = stopped_model.predict_proba(&embedding).unwrap();
        let from_best = best_model.predict_proba(&embedding).unwrap();
        assert_eq!(
            from_stopped, from_best,
            "restored weights must reproduce best-epoch predictions exactly"
        );
    }
    println!(
        "criterion 5: PASS (injected sequences stop at best+patience for patience 1..5; \
         full run stopped at epoch {} with best {} and reproduced best-epoch predictions)",
        history.stopped_epoch, history.best_epoch
    );
}

// ---------------------------------------------------------------------------
// criterion 6: output-layer gradients vs central finite differences

#[test]
fn criterion_6_output_layer_gradients_match_finite_differences() {
    const STEP: f64 = 1e-4;
    const REL_TOLERANCE: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (input, hidden, classes) = (5, 4, 6);
    let vectors = Array3::from_shape_fn((3, 3, input), |_| rng.random_range(-1.0..1.0));
    let mask = arr2(&[[1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
    let mut targets = Array2::zeros((3, classes));
    for (row, class) in [0usize, 2, 5].iter().enumerate() {
        targets[[row, *class]] = 1.0;
    }

    let mut worst_rel: f64 = 0.0;
    for batch_norm in [true, false] {
        let mut params = net::Params::init(&mut rng, input, hidden, classes, batch_norm);
        let placement = DropoutPlacement::AfterBatchNorm;
        let (_, cache) = net::forward_train(&params, &vectors, &mask, None, placement, &targets);
        let grads = net::backward(&params, &cache, &targets);
        let analytic = grads.flat();
        // The last two tensors are the dense output layer's weights and bias.
        let n_tensors = analytic.len();
        for tensor_idx in [n_tensors - 2, n_tensors - 1] {
            for (j, &a) in analytic[tensor_idx].iter().enumerate() {
                let nudge = |params: &mut net::Params, delta: f64| {
                    params.flat_mut()[tensor_idx][j] += delta;
                };
                nudge(&mut params, STEP);
                let (loss_plus, _) =
                    net::forward_train(&params, &vectors, &mask, None, placement, &targets);
                nudge(&mut params, -2.0 * STEP);
                let (loss_minus, _) =
                    net::forward_train(&params, &vectors, &mask, None, placement, &targets);
                nudge(&mut params, STEP);
                let fd = (loss_plus - loss_minus) / (2.0 * STEP);
                let scale = a.abs().max(fd.abs());
                if scale < 1e-7 {
                    assert!((a - fd).abs() < 1e-7);
                } else {
                    let rel = (a - fd).abs() / scale;
                    worst_rel = worst_rel.max(rel);
                    assert!(
                        rel < REL_TOLERANCE,
                        "batch_norm={batch_norm} tensor {tensor_idx} elem {j}: \
                         analytic {a}, finite-difference {fd}, rel {rel}"
                    );
                }
            }
        }
    }
    println!(
        "criterion 6: PASS (output layer, 3-sample batch, batch norm on and off, \
         worst rel error {worst_rel:.2e} < 1e-3)"
    );
}

// ---------------------------------------------------------------------------
// criterion 7: probability normalization, one-hot round-trips, hidden sizes

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..=8);
    (0..len)
        .map(|_| (b'a' + rng.random_range(0..26)) as char)
        .collect()
}

#[test]
fn criterion_7_normalization_invariants_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    // Probability vectors from a real trained model sum to one.
    let backend = load_backend_by_name("hash-16", None).unwrap();
    let scheme = TagScheme::canonical();
    let corpus = separable_corpus(10, 7);
    let ds = EncodedDataset::encode(&corpus, backend.as_ref(), &scheme, 6).unwrap();
    let spec = ModelSpec {
        lstm_hidden: 8,
        ..ModelSpec::for_input(16)
    };
    let cfg = TrainingConfig {
        learning_rate: 1e-2,
        batch_size: 8,
        max_epochs: 2,
        early_stopping_patience: 3,
        seed: 7,
    };
    let model = Model::new(spec, scheme.clone(), "hash-16", 6, 7).unwrap();
    let (trained, _) = model.train(&ds, &ds, &cfg).unwrap();
    let mut worst_sum_err: f64 = 0.0;
    for _ in 0..1000 {
        let word = random_word(&mut rng);
        let embedding = backend.embed_word(&word).unwrap();
        let probs = trained.predict_proba(&embedding).unwrap();
        let err = (probs.sum() - 1.0).abs();
        worst_sum_err = worst_sum_err.max(err);
        assert!(
            err < 1e-6,
            "probabilities for {word:?} sum to {}",
            probs.sum()
        );
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    // One-hot encoding round-trips for every tag.
    for _ in 0..1000 {
        let tag = *Tag::CANONICAL.choose(&mut rng).unwrap();
        let v = scheme.one_hot(tag.name()).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(scheme.decode_one_hot(&v).unwrap(), tag.name());
    }

    // Declared hidden sizes match the published table, and an actually
    // loaded backend of each name embeds at exactly that width.
    let expected = [
        ("bert-base-uncased", 768),
        ("bert-base-multilingual-uncased", 768),
        ("xlm-roberta-large", 1024),
        ("roberta-base", 768),
    ];
    let cache = tempfile::tempdir().unwrap();
    for (name, hidden) in expected {
        assert_eq!(lookup(name).unwrap().hidden_size, hidden, "{name}");
        let values: Vec<String> = (0..hidden)
            .map(|i| format!("{:.3}", 0.001 * (i % 11) as f64))
            .collect();
        let body = format!(
            r#"{{"hidden_size": {hidden}, "unknown_piece": "[UNK]", "pieces": {{"[UNK]": [{}]}}}}"#,
            values.join(",")
        );
        std::fs::write(cache.path().join(format!("{name}.vocab.json")), body).unwrap();
        let loaded = load_backend_by_name(name, Some(cache.path())).unwrap();
        assert_eq!(loaded.hidden_size(), hidden);
        for _ in 0..5 {
            let embedding = loaded.embed_word(&random_word(&mut rng)).unwrap();
            assert_eq!(embedding.hidden_size(), hidden, "{name}");
            assert_eq!(embedding.pooled().len(), hidden, "{name}");
        }
    }
    println!(
        "criterion 7: PASS (1000 probability sums within 1e-6, worst {worst_sum_err:.2e}; \
         1000 one-hot round-trips; hidden sizes 768/768/1024/768 declared and loaded)"
    );
}

// ---------------------------------------------------------------------------
// criterion 8: tag distribution of the real training corpus (conditional)

/// Set this to the real training file to enable the distribution check.
const CORPUS_ENV: &str = "KANGLID_COLI_TRAIN";

#[test]
fn criterion_8_corpus_distribution_when_available() {
    let path = match std::env::var_os(CORPUS_ENV) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            println!(
                "criterion 8: SKIP (corpus not available; set {CORPUS_ENV} to the training \
                 file to enable)"
            );
            return;
        }
    };
    let corpus = load_corpus(&path, CorpusFormat::from_path(&path)).unwrap();
    let stats = compute_distribution(&corpus).unwrap();
    let expected = [
        (Tag::Kn, 43.9),
        (Tag::En, 30.0),
        (Tag::EnKn, 9.28),
        (Tag::Name, 4.76),
        (Tag::Location, 0.68),
        (Tag::Other, 11.2),
    ];
    for (tag, want) in expected {
        let got = stats.percent(tag);
        assert!(
            (got - want).abs() <= 0.1,
            "{tag}: got {got:.2}%, expected {want}% within 0.1 percentage points"
        );
    }
    println!("criterion 8: PASS (all six tag shares within 0.1pp of the published figures)");
}

// ---------------------------------------------------------------------------
// criterion 9: full-scale result (optional, never run at desk scale)

#[test]
fn criterion_9_full_scale_run_is_out_of_scope_here() {
    println!(
        "criterion 9: SKIP (optional: a full bert-base-uncased run targeting weighted F1 \
         0.84 +/- 0.03 and macro F1 0.61 +/- 0.04 needs the real corpus, pretrained weights \
         and hours of compute; criteria 1-8 carry acceptance)"
    );
}

// ---------------------------------------------------------------------------

/// The fixtures themselves must stay sane or the criteria above test nothing.
#[test]
fn fixture_corpus_is_balanced_and_round_trips_as_tsv() {
    let corpus = separable_corpus(25, 1);
    assert_eq!(corpus.len(), 50);
    let flipped = flipped_labels(&corpus);
    assert_eq!(flipped.len(), 50);
    for (a, b) in corpus.items().iter().zip(flipped.items()) {
        assert_eq!(a.word(), b.word());
        assert_ne!(a.tag(), b.tag());
    }
    let tsv = corpus_tsv(&corpus);
    assert_eq!(tsv.lines().count(), 50);
    assert!(tsv.lines().all(|l| l.split('\t').count() == 2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.tsv");
    std::fs::write(&path, &tsv).unwrap();
    let reloaded = load_corpus(&path, CorpusFormat::from_path(&path)).unwrap();
    assert_eq!(reloaded.len(), corpus.len());
    for (a, b) in corpus.items().iter().zip(reloaded.items()) {
        assert_eq!(a.word(), b.word());
        assert_eq!(a.tag(), b.tag());
    }
}
