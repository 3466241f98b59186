#![allow(dead_code)]

//! Shared fixtures for the integration suites.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::process::Command;

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kanglid::corpus::{LabeledCorpus, LabeledToken, Tag};
use kanglid::embedding::EmbeddingBackend;

/// Two artificial languages over disjoint three-letter alphabets, cleanly
/// separable in character-trigram space.
pub fn separable_corpus(per_tag: usize, seed: u64) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word = |alphabet: &str| -> String {
        let chars: Vec<char> = alphabet.chars().collect();
        let len = rng.random_range(3..7);
        (0..len).map(|_| *chars.choose(&mut rng).unwrap()).collect()
    };
    let mut items = Vec::new();
    for _ in 0..per_tag {
        items.push(LabeledToken::new(word("aei"), Tag::Kn).unwrap());
        items.push(LabeledToken::new(word("kst"), Tag::En).unwrap());
    }
    LabeledCorpus::from_tokens(items)
}

/// The same corpus with every label swapped between the two tags.
pub fn flipped_labels(corpus: &LabeledCorpus) -> LabeledCorpus {
    let items = corpus
        .items()
        .iter()
        .map(|item| {
            let flipped = match item.tag() {
                Tag::Kn => Tag::En,
                Tag::En => Tag::Kn,
                other => other,
            };
            LabeledToken::new(item.word(), flipped).unwrap()
        })
        .collect();
    LabeledCorpus::from_tokens(items)
}

pub fn corpus_tsv(corpus: &LabeledCorpus) -> String {
    let mut text = String::new();
    for item in corpus.items() {
        writeln!(text, "{}\t{}", item.word(), item.tag()).unwrap();
    }
    text
}

/// Nearest-centroid accuracy over pooled embeddings: a model-free check
/// that a corpus is separable in embedding space at all.
pub fn nearest_centroid_accuracy(backend: &dyn EmbeddingBackend, corpus: &LabeledCorpus) -> f64 {
    let mut sums: HashMap<Tag, (Array1<f64>, usize)> = HashMap::new();
    let pooled: Vec<(Tag, Array1<f64>)> = corpus
        .items()
        .iter()
        .map(|item| {
            let v = backend.embed_word(item.word()).unwrap().pooled().clone();
            (item.tag(), v)
        })
        .collect();
    for (tag, v) in &pooled {
        let entry = sums
            .entry(*tag)
            .or_insert_with(|| (Array1::zeros(v.len()), 0));
        entry.0 += v;
        entry.1 += 1;
    }
    let centroids: Vec<(Tag, Array1<f64>)> = sums
        .into_iter()
        .map(|(tag, (sum, n))| (tag, sum / n as f64))
        .collect();
    let hits = pooled
        .iter()
        .filter(|(tag, v)| {
            let nearest = centroids
                .iter()
                .min_by(|a, b| {
                    let da = (&a.1 - v).mapv(|x| x * x).sum();
                    let db = (&b.1 - v).mapv(|x| x * x).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
                .0;
            nearest == *tag
        })
        .count();
    hits as f64 / pooled.len() as f64
}

pub fn kanglid_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kanglid"))
}
