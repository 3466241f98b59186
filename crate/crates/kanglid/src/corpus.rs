//! Word/tag corpora: ingestion, validation, one-hot encoding, splitting and
//! distribution statistics.
//!
//! The on-disk formats are `word<TAB>tag` (one token per line, UTF-8) and
//! two-column CSV with a header. Tags are matched case-insensitively and
//! normalized to lowercase.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six word-level language tags, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Kn,
    En,
    EnKn,
    Name,
    Location,
    Other,
}

impl Tag {
    /// Number of tags in the scheme.
    pub const COUNT: usize = 6;

    /// All tags in canonical order: kn, en, en-kn, name, location, other.
    pub const CANONICAL: [Tag; Tag::COUNT] = [
        Tag::Kn,
        Tag::En,
        Tag::EnKn,
        Tag::Name,
        Tag::Location,
        Tag::Other,
    ];

    /// Lowercase canonical name.
    pub fn name(self) -> &'static str {
        match self {
            Tag::Kn => "kn",
            Tag::En => "en",
            Tag::EnKn => "en-kn",
            Tag::Name => "name",
            Tag::Location => "location",
            Tag::Other => "other",
        }
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        match self {
            Tag::Kn => 0,
            Tag::En => 1,
            Tag::EnKn => 2,
            Tag::Name => 3,
            Tag::Location => 4,
            Tag::Other => 5,
        }
    }

    pub fn from_index(index: usize) -> Option<Tag> {
        Tag::CANONICAL.get(index).copied()
    }

    /// Case-insensitive parse; `None` for anything outside the scheme.
    pub fn parse(s: &str) -> Option<Tag> {
        match s.to_ascii_lowercase().as_str() {
            "kn" => Some(Tag::Kn),
            "en" => Some(Tag::En),
            "en-kn" => Some(Tag::EnKn),
            "name" => Some(Tag::Name),
            "location" => Some(Tag::Location),
            "other" => Some(Tag::Other),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Tag> {
        Tag::parse(s).ok_or_else(|| Error::UnknownTag {
            tag: s.to_string(),
            line: None,
        })
    }
}

/// The ordered label set a model was trained against.
///
/// The order is fixed for the lifetime of a trained model; checkpoints store
/// it verbatim so a load against a different scheme is rejected instead of
/// silently permuting classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagScheme {
    tags: Vec<String>,
}

impl TagScheme {
    /// The canonical six-tag scheme.
    pub fn canonical() -> TagScheme {
        TagScheme {
            tags: Tag::CANONICAL
                .iter()
                .map(|t| t.name().to_string())
                .collect(),
        }
    }

    /// Rebuild a scheme from stored tag names (e.g. a checkpoint field).
    /// No validation happens here; compatibility is checked at use sites.
    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> TagScheme {
        TagScheme {
            tags: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.tags
    }

    /// Index of `tag` in this scheme (case-insensitive).
    pub fn index_of(&self, tag: &str) -> Option<usize> {
        let needle = tag.to_ascii_lowercase();
        self.tags.iter().position(|t| *t == needle)
    }

    /// One-hot encode a tag name: 1.0 at its index, 0.0 elsewhere.
    pub fn one_hot(&self, tag: &str) -> Result<Vec<f64>> {
        let idx = self.index_of(tag).ok_or_else(|| Error::UnknownTag {
            tag: tag.to_string(),
            line: None,
        })?;
        let mut v = vec![0.0; self.len()];
        v[idx] = 1.0;
        Ok(v)
    }

    /// Inverse of [`TagScheme::one_hot`]. Rejects anything that is not an
    /// exact one-hot vector of this scheme's length.
    pub fn decode_one_hot(&self, vector: &[f64]) -> Result<&str> {
        let valid_shape = vector.len() == self.len();
        let ones = vector.iter().filter(|&&x| x == 1.0).count();
        let zeros = vector.iter().filter(|&&x| x == 0.0).count();
        if !valid_shape || ones != 1 || ones + zeros != vector.len() {
            return Err(Error::InvalidOneHot {
                vector: vector.to_vec(),
            });
        }
        let idx = vector.iter().position(|&x| x == 1.0).unwrap();
        Ok(&self.tags[idx])
    }
}

impl Default for TagScheme {
    fn default() -> Self {
        TagScheme::canonical()
    }
}

/// One word paired with its language tag; the atomic corpus unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledToken {
    word: String,
    tag: Tag,
}

impl LabeledToken {
    /// Build a token, enforcing that the word is non-empty and free of tab
    /// and newline characters.
    pub fn new(word: impl Into<String>, tag: Tag) -> Result<LabeledToken> {
        let word = word.into();
        if word.is_empty() {
            return Err(Error::Config {
                reason: "a labeled token needs a non-empty word".to_string(),
            });
        }
        if word.contains(['\t', '\n', '\r']) {
            return Err(Error::Config {
                reason: format!("word {word:?} contains tab or newline characters"),
            });
        }
        Ok(LabeledToken { word, tag })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }
}

/// Input file format for [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// `word<TAB>tag`, one token per line, no header.
    Tsv,
    /// Two-column CSV with a header row.
    Csv,
    /// Built in memory (synthetic corpora, tests).
    Memory,
}

impl CorpusFormat {
    /// Pick a format from a file extension; anything but `.csv` is TSV.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Tsv,
        }
    }
}

/// Where a corpus came from, kept for error messages and run metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub format: CorpusFormat,
}

/// An immutable sequence of labeled tokens.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    items: Vec<LabeledToken>,
    provenance: Provenance,
}

impl LabeledCorpus {
    /// Wrap tokens built elsewhere (synthetic corpora, tests).
    pub fn from_tokens(items: Vec<LabeledToken>) -> LabeledCorpus {
        LabeledCorpus {
            items,
            provenance: Provenance {
                source: "<memory>".to_string(),
                format: CorpusFormat::Memory,
            },
        }
    }

    pub fn items(&self) -> &[LabeledToken] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|t| t.word())
    }

    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        self.items.iter().map(|t| t.tag())
    }
}

/// Load a corpus from `path`.
///
/// Every non-blank input line either becomes a token or aborts the load with
/// an error naming the line; nothing is dropped silently.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LabeledCorpus> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    let source_name = path.display().to_string();
    let items = match format {
        CorpusFormat::Tsv => parse_tsv(&std::fs::read_to_string(path)?, &source_name)?,
        CorpusFormat::Csv => parse_csv(path, &source_name)?,
        CorpusFormat::Memory => {
            return Err(Error::Config {
                reason: "the in-memory format cannot be loaded from a file".to_string(),
            })
        }
    };
    if items.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(LabeledCorpus {
        items,
        provenance: Provenance {
            source: source_name,
            format,
        },
    })
}

fn parse_tsv(text: &str, source_name: &str) -> Result<Vec<LabeledToken>> {
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or("").trim();
        let tag_text = match fields.next() {
            Some(t) => t.trim(),
            None => {
                return Err(Error::MalformedLine {
                    source_name: source_name.to_string(),
                    line: line_no,
                    reason: "expected word<TAB>tag, found 1 column".to_string(),
                })
            }
        };
        if fields.next().is_some() {
            return Err(Error::MalformedLine {
                source_name: source_name.to_string(),
                line: line_no,
                reason: "expected word<TAB>tag, found more than 2 columns".to_string(),
            });
        }
        items.push(parse_token(word, tag_text, source_name, line_no)?);
    }
    Ok(items)
}

fn parse_csv(path: &Path, source_name: &str) -> Result<Vec<LabeledToken>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::MalformedLine {
            source_name: source_name.to_string(),
            line: 1,
            reason: e.to_string(),
        })?;
    let mut items = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or_default();
            Error::MalformedLine {
                source_name: source_name.to_string(),
                line,
                reason: e.to_string(),
            }
        })?;
        let line_no = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::MalformedLine {
                source_name: source_name.to_string(),
                line: line_no,
                reason: format!("expected 2 columns, found {}", record.len()),
            });
        }
        items.push(parse_token(
            record[0].trim(),
            record[1].trim(),
            source_name,
            line_no,
        )?);
    }
    Ok(items)
}

fn parse_token(
    word: &str,
    tag_text: &str,
    source_name: &str,
    line_no: usize,
) -> Result<LabeledToken> {
    if word.is_empty() {
        return Err(Error::MalformedLine {
            source_name: source_name.to_string(),
            line: line_no,
            reason: "empty word field".to_string(),
        });
    }
    let tag = Tag::parse(tag_text).ok_or_else(|| Error::UnknownTag {
        tag: tag_text.to_string(),
        line: Some(line_no),
    })?;
    LabeledToken::new(word, tag)
}

/// Deterministically partition a corpus into train and validation sets.
///
/// With `stratified` set, each tag contributes its own rounded share of
/// validation items (at least one, never all), so rare tags are represented.
/// The same `(corpus, val_fraction, seed, stratified)` inputs always produce
/// the same partition.
pub fn split_corpus(
    corpus: &LabeledCorpus,
    val_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Config {
            reason: format!("val_fraction must be in (0,1), got {val_fraction}"),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut val_indices: HashSet<usize> = HashSet::new();

    if stratified {
        for tag in Tag::CANONICAL {
            let mut stratum: Vec<usize> = corpus
                .items
                .iter()
                .enumerate()
                .filter(|(_, t)| t.tag() == tag)
                .map(|(i, _)| i)
                .collect();
            if stratum.is_empty() {
                continue;
            }
            if stratum.len() < 2 {
                return Err(Error::StratumTooSmall {
                    tag,
                    size: stratum.len(),
                });
            }
            let n = stratum.len();
            let want = (val_fraction * n as f64).round() as usize;
            let take = want.clamp(1, n - 1);
            stratum.shuffle(&mut rng);
            val_indices.extend(stratum.into_iter().take(take));
        }
    } else {
        let n = corpus.len();
        if n < 2 {
            return Err(Error::Config {
                reason: "a corpus of one item cannot be split".to_string(),
            });
        }
        let want = (val_fraction * n as f64).round() as usize;
        let take = want.clamp(1, n - 1);
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        val_indices.extend(indices.into_iter().take(take));
    }

    let mut train = Vec::with_capacity(corpus.len() - val_indices.len());
    let mut val = Vec::with_capacity(val_indices.len());
    for (i, item) in corpus.items.iter().enumerate() {
        if val_indices.contains(&i) {
            val.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }

    let as_corpus = |items: Vec<LabeledToken>| LabeledCorpus {
        items,
        provenance: corpus.provenance.clone(),
    };
    Ok((as_corpus(train), as_corpus(val)))
}

/// Per-tag counts and percentages over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub total: usize,
    counts: [usize; Tag::COUNT],
}

impl DistributionStats {
    pub fn count(&self, tag: Tag) -> usize {
        self.counts[tag.index()]
    }

    /// Share of the corpus carrying `tag`, in percent.
    pub fn percent(&self, tag: Tag) -> f64 {
        self.count(tag) as f64 / self.total as f64 * 100.0
    }

    /// Iterate `(tag, count, percent)` in canonical order.
    pub fn rows(&self) -> impl Iterator<Item = (Tag, usize, f64)> + '_ {
        Tag::CANONICAL
            .iter()
            .map(|&t| (t, self.count(t), self.percent(t)))
    }

    /// Flat key/value report consumed by humans and scripts alike.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("total={}\n", self.total));
        for (tag, count, percent) in self.rows() {
            out.push_str(&format!("{tag}.count={count}\n"));
            out.push_str(&format!("{tag}.percent={percent:.2}\n"));
        }
        out
    }
}

/// Count tag occurrences and derive percentages.
pub fn compute_distribution(corpus: &LabeledCorpus) -> Result<DistributionStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts = [0usize; Tag::COUNT];
    for item in corpus.items() {
        counts[item.tag().index()] += 1;
    }
    Ok(DistributionStats {
        total: corpus.len(),
        counts,
    })
}
