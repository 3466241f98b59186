//! Train on a synthetic two-language corpus and watch it converge.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kanglid::classifier::{EncodedDataset, Model, ModelSpec, TrainingConfig};
use kanglid::corpus::{split_corpus, LabeledCorpus, LabeledToken, Tag, TagScheme};
use kanglid::embedding::load_backend_by_name;

/// Two artificial languages over disjoint alphabets.
fn synthetic_corpus(per_tag: usize, seed: u64) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vowels: Vec<char> = "aeiou".chars().collect();
    let consonants: Vec<char> = "kstnr".chars().collect();
    let mut word = |alphabet: &[char]| -> String {
        let len = rng.random_range(3..8);
        (0..len)
            .map(|_| *alphabet.choose(&mut rng).unwrap())
            .collect()
    };
    let mut items = Vec::new();
    for _ in 0..per_tag {
        items.push(LabeledToken::new(word(&vowels), Tag::Kn).unwrap());
        items.push(LabeledToken::new(word(&consonants), Tag::En).unwrap());
    }
    LabeledCorpus::from_tokens(items)
}

fn main() -> kanglid::Result<()> {
    let corpus = synthetic_corpus(100, 13);
    let (train, val) = split_corpus(&corpus, 0.2, 13, true)?;

    let backend = load_backend_by_name("hash-32", None)?;
    let scheme = TagScheme::canonical();
    let max_subwords = 8;
    let train_ds = EncodedDataset::encode(&train, backend.as_ref(), &scheme, max_subwords)?;
    let val_ds = EncodedDataset::encode(&val, backend.as_ref(), &scheme, max_subwords)?;

    let spec = ModelSpec {
        lstm_hidden: 16,
        ..ModelSpec::for_input(backend.hidden_size())
    };
    let model = Model::new(spec, scheme, backend.name(), max_subwords, 13)?;
    print!("{}", model.summary());

    let cfg = TrainingConfig {
        learning_rate: 3e-3,
        batch_size: 16,
        max_epochs: 15,
        ..TrainingConfig::default()
    };
    let (trained, history) = model.train(&train_ds, &val_ds, &cfg)?;

    println!(
        "\n{:<6} {:>10} {:>8} {:>10} {:>8}",
        "epoch", "loss", "acc", "val loss", "val acc"
    );
    for r in &history.records {
        println!(
            "{:<6} {:>10.4} {:>8.3} {:>10.4} {:>8.3}",
            r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
        );
    }
    println!(
        "best epoch {} of {}",
        history.best_epoch, history.stopped_epoch
    );

    println!();
    for word in ["aiea", "ksnt", "uuoi", "trrk"] {
        println!("{word} -> {}", trained.classify(backend.as_ref(), word)?);
    }
    Ok(())
}
