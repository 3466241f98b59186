//! Word embedding backends.
//!
//! Two kinds are supported. Pretrained transformer backends read a local
//! weight bundle (a JSON subword vocabulary with per-piece vectors) from a
//! cache directory and tokenize words greedily against it. The deterministic
//! hash backend derives a vector per character trigram from a seeded stream
//! cipher and needs no files or network at all, which makes it the default
//! for tests and offline experiments.
//!
//! Every backend emits one vector per subword unit; the classifier consumes
//! the whole sequence and a mean-pooled vector is exposed for diagnostics.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a backend treats letter case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Casing {
    /// Input words are lowercased before tokenization.
    Uncased,
    /// Input words pass through unchanged.
    Cased,
}

/// Which mechanism produces the vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    PretrainedTransformer,
    DeterministicHash,
}

/// Static description of an embedding backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingBackendConfig {
    pub name: String,
    pub kind: BackendKind,
    pub hidden_size: usize,
    /// Transformer depth; absent for the hash backend.
    pub transformer_blocks: Option<usize>,
    pub attention_heads: Option<usize>,
    /// Informational total parameter count of the underlying model.
    pub parameter_count: Option<u64>,
    pub casing: Casing,
}

/// Default dimensionality of the hash backend.
pub const HASH_DEFAULT_HIDDEN: usize = 64;

/// Hard cap on subword sequence length unless the caller says otherwise.
pub const DEFAULT_MAX_SUBWORDS: usize = 16;

fn transformer_config(
    name: &str,
    hidden: usize,
    blocks: usize,
    heads: usize,
    params: u64,
    casing: Casing,
) -> EmbeddingBackendConfig {
    EmbeddingBackendConfig {
        name: name.to_string(),
        kind: BackendKind::PretrainedTransformer,
        hidden_size: hidden,
        transformer_blocks: Some(blocks),
        attention_heads: Some(heads),
        parameter_count: Some(params),
        casing,
    }
}

fn hash_config(hidden: usize) -> EmbeddingBackendConfig {
    EmbeddingBackendConfig {
        name: format!("hash-{hidden}"),
        kind: BackendKind::DeterministicHash,
        hidden_size: hidden,
        transformer_blocks: None,
        attention_heads: None,
        parameter_count: None,
        casing: Casing::Uncased,
    }
}

/// The four published transformer backends, plus the default hash fallback.
pub fn registry() -> Vec<EmbeddingBackendConfig> {
    vec![
        transformer_config(
            "bert-base-uncased",
            768,
            12,
            12,
            110_000_000,
            Casing::Uncased,
        ),
        transformer_config(
            "bert-base-multilingual-uncased",
            768,
            12,
            12,
            110_000_000,
            Casing::Uncased,
        ),
        transformer_config(
            "xlm-roberta-large",
            1024,
            24,
            16,
            355_000_000,
            Casing::Cased,
        ),
        transformer_config("roberta-base", 768, 12, 12, 110_000_000, Casing::Cased),
        hash_config(HASH_DEFAULT_HIDDEN),
    ]
}

/// Resolve a backend name to its configuration.
///
/// `hash` and `hash-N` (N a positive dimensionality) are recognized alongside
/// the registered transformer names.
pub fn lookup(name: &str) -> Result<EmbeddingBackendConfig> {
    if name == "hash" {
        return Ok(hash_config(HASH_DEFAULT_HIDDEN));
    }
    if let Some(spec) = name.strip_prefix("hash-") {
        if let Ok(hidden) = spec.parse::<usize>() {
            if hidden > 0 {
                return Ok(hash_config(hidden));
            }
        }
        return Err(Error::UnknownBackend {
            name: name.to_string(),
        });
    }
    registry()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownBackend {
            name: name.to_string(),
        })
}

/// One word's embedding: a subword vector sequence plus a mean-pooled vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbedding {
    word: String,
    backend: String,
    /// (n_subwords, hidden_size); never zero rows.
    vectors: Array2<f64>,
    pooled: Array1<f64>,
}

impl WordEmbedding {
    pub fn word(&self) -> &str {
        &self.word
    }

    /// Name of the backend that produced this embedding.
    pub fn backend(&self) -> &str {
        &self.backend
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn n_subwords(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.vectors.ncols()
    }

    /// Mean of the subword vectors.
    pub fn pooled(&self) -> &Array1<f64> {
        &self.pooled
    }
}

fn finish_embedding(word: &str, backend: &str, vectors: Array2<f64>) -> WordEmbedding {
    debug_assert!(vectors.nrows() > 0);
    let pooled = vectors.mean_axis(ndarray::Axis(0)).unwrap();
    WordEmbedding {
        word: word.to_string(),
        backend: backend.to_string(),
        vectors,
        pooled,
    }
}

/// A loaded backend, ready to embed words. Immutable after construction.
pub trait EmbeddingBackend: Send + Sync {
    fn name(&self) -> &str;
    fn hidden_size(&self) -> usize;
    fn casing(&self) -> Casing;

    /// Embed one word: one vector per subword unit.
    fn embed_word(&self, word: &str) -> Result<WordEmbedding>;
}

impl fmt::Debug for dyn EmbeddingBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "EmbeddingBackend({}, d={})",
            self.name(),
            self.hidden_size()
        )
    }
}

fn apply_casing(word: &str, casing: Casing) -> String {
    match casing {
        Casing::Uncased => word.to_lowercase(),
        Casing::Cased => word.to_string(),
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic offline backend.
///
/// The word is padded to `<word>`, split into character trigrams, and each
/// trigram's FNV-1a hash seeds a ChaCha8 stream that yields a fixed vector
/// in [-1, 1). Subword vectors are the trigram vectors in order, so the
/// embedding is a pure function of (word, hidden_size).
#[derive(Debug)]
pub struct HashBackend {
    config: EmbeddingBackendConfig,
}

impl HashBackend {
    pub fn new(hidden_size: usize) -> Result<HashBackend> {
        if hidden_size == 0 {
            return Err(Error::Config {
                reason: "hash backend hidden_size must be positive".to_string(),
            });
        }
        Ok(HashBackend {
            config: hash_config(hidden_size),
        })
    }

    fn trigram_vector(&self, trigram: &str) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(trigram.as_bytes()));
        Array1::from_iter((0..self.config.hidden_size).map(|_| rng.random_range(-1.0..1.0)))
    }
}

impl EmbeddingBackend for HashBackend {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn hidden_size(&self) -> usize {
        self.config.hidden_size
    }

    fn casing(&self) -> Casing {
        self.config.casing
    }

    fn embed_word(&self, word: &str) -> Result<WordEmbedding> {
        let normalized = apply_casing(word, self.casing());
        if normalized.is_empty() {
            return Err(Error::EmptyWord);
        }
        let padded: Vec<char> = std::iter::once('<')
            .chain(normalized.chars())
            .chain(std::iter::once('>'))
            .collect();
        let hidden = self.config.hidden_size;
        let mut vectors = Array2::zeros((padded.len() - 2, hidden));
        for (i, window) in padded.windows(3).enumerate() {
            let trigram: String = window.iter().collect();
            vectors.row_mut(i).assign(&self.trigram_vector(&trigram));
        }
        Ok(finish_embedding(word, self.name(), vectors))
    }
}

/// On-disk weight bundle: `<backend name>.vocab.json` in the cache directory.
#[derive(Debug, Deserialize)]
struct WeightBundle {
    hidden_size: usize,
    unknown_piece: String,
    #[serde(default = "default_continuation_prefix")]
    continuation_prefix: String,
    pieces: HashMap<String, Vec<f64>>,
}

fn default_continuation_prefix() -> String {
    "##".to_string()
}

/// Pretrained transformer embeddings served from a local weight bundle.
///
/// Tokenization is greedy longest-match against the bundle's piece table,
/// with non-initial pieces looked up under the continuation prefix. A word
/// with no decomposition falls back to the unknown piece as a whole, so
/// every word yields at least one subword vector.
#[derive(Debug)]
pub struct PretrainedBackend {
    config: EmbeddingBackendConfig,
    unknown_piece: String,
    continuation_prefix: String,
    pieces: HashMap<String, Array1<f64>>,
}

impl PretrainedBackend {
    pub fn load(config: &EmbeddingBackendConfig, cache_dir: &Path) -> Result<PretrainedBackend> {
        let path = cache_dir.join(format!("{}.vocab.json", config.name));
        if !path.exists() {
            return Err(Error::WeightsUnavailable {
                name: config.name.clone(),
                cache_dir: cache_dir.to_path_buf(),
            });
        }
        let corrupt = |reason: String| Error::CorruptWeights {
            name: config.name.clone(),
            reason,
        };
        let text = std::fs::read_to_string(&path)?;
        let bundle: WeightBundle =
            serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if bundle.hidden_size != config.hidden_size {
            return Err(corrupt(format!(
                "bundle hidden_size {} does not match the declared {}",
                bundle.hidden_size, config.hidden_size
            )));
        }
        if !bundle.pieces.contains_key(&bundle.unknown_piece) {
            return Err(corrupt(format!(
                "unknown_piece \"{}\" has no vector in the bundle",
                bundle.unknown_piece
            )));
        }
        let mut pieces = HashMap::with_capacity(bundle.pieces.len());
        for (piece, vector) in bundle.pieces {
            if vector.len() != bundle.hidden_size {
                return Err(corrupt(format!(
                    "piece \"{piece}\" has length {}, expected {}",
                    vector.len(),
                    bundle.hidden_size
                )));
            }
            if vector.iter().any(|x| !x.is_finite()) {
                return Err(corrupt(format!("piece \"{piece}\" has non-finite entries")));
            }
            pieces.insert(piece, Array1::from_vec(vector));
        }
        Ok(PretrainedBackend {
            config: config.clone(),
            unknown_piece: bundle.unknown_piece,
            continuation_prefix: bundle.continuation_prefix,
            pieces,
        })
    }

    /// Greedy longest-match decomposition; whole-word fallback to the
    /// unknown piece when any position fails to match.
    fn tokenize(&self, word: &str) -> Vec<&str> {
        let chars: Vec<char> = word.chars().collect();
        let mut out: Vec<&str> = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut matched: Option<&str> = None;
            while end > start {
                let sub: String = chars[start..end].iter().collect();
                let key = if start == 0 {
                    sub
                } else {
                    format!("{}{}", self.continuation_prefix, sub)
                };
                if let Some((k, _)) = self.pieces.get_key_value(key.as_str()) {
                    matched = Some(k.as_str());
                    break;
                }
                end -= 1;
            }
            match matched {
                Some(k) => {
                    out.push(k);
                    start = end;
                }
                None => return vec![self.unknown_piece.as_str()],
            }
        }
        if out.is_empty() {
            vec![self.unknown_piece.as_str()]
        } else {
            out
        }
    }
}

impl EmbeddingBackend for PretrainedBackend {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn hidden_size(&self) -> usize {
        self.config.hidden_size
    }

    fn casing(&self) -> Casing {
        self.config.casing
    }

    fn embed_word(&self, word: &str) -> Result<WordEmbedding> {
        let normalized = apply_casing(word, self.casing());
        if normalized.is_empty() {
            return Err(Error::EmptyWord);
        }
        let pieces = self.tokenize(&normalized);
        let hidden = self.config.hidden_size;
        let mut vectors = Array2::zeros((pieces.len(), hidden));
        for (i, piece) in pieces.iter().enumerate() {
            vectors.row_mut(i).assign(&self.pieces[*piece]);
        }
        Ok(finish_embedding(word, self.name(), vectors))
    }
}

/// Instantiate the backend described by `config`.
///
/// Pretrained kinds need `cache_dir` to hold their weight bundle; the hash
/// kind ignores it and performs no I/O.
///
// TODO: expose a fine-tuning switch if a gradient-capable transformer
// backend ever lands; bundle vectors are frozen lookups today.
pub fn load_backend(
    config: &EmbeddingBackendConfig,
    cache_dir: Option<&Path>,
) -> Result<Box<dyn EmbeddingBackend>> {
    match config.kind {
        BackendKind::DeterministicHash => Ok(Box::new(HashBackend::new(config.hidden_size)?)),
        BackendKind::PretrainedTransformer => {
            let dir = cache_dir.ok_or_else(|| Error::WeightsUnavailable {
                name: config.name.clone(),
                cache_dir: PathBuf::from("<no cache directory configured>"),
            })?;
            Ok(Box::new(PretrainedBackend::load(config, dir)?))
        }
    }
}

/// Convenience: resolve a name and load in one step.
pub fn load_backend_by_name(
    name: &str,
    cache_dir: Option<&Path>,
) -> Result<Box<dyn EmbeddingBackend>> {
    load_backend(&lookup(name)?, cache_dir)
}

/// A padded batch of word embeddings plus its validity mask.
#[derive(Debug, Clone)]
pub struct EmbeddedBatch {
    /// Name of the backend that produced the batch.
    pub backend: String,
    /// (batch, steps, hidden); padding rows are zero.
    pub vectors: Array3<f64>,
    /// (batch, steps); 1.0 at real subword positions, 0.0 at padding.
    pub mask: Array2<f64>,
    /// Words whose subword sequence was cut to `max_subwords`.
    pub truncated: usize,
}

impl EmbeddedBatch {
    pub fn batch_size(&self) -> usize {
        self.vectors.shape()[0]
    }

    pub fn steps(&self) -> usize {
        self.vectors.shape()[1]
    }
}

/// Embed `words` into one zero-padded batch.
///
/// The step dimension is the longest surviving subword sequence, capped at
/// `max_subwords`; longer words are truncated (front-kept) and counted.
pub fn embed_batch(
    backend: &dyn EmbeddingBackend,
    words: &[&str],
    max_subwords: usize,
) -> Result<EmbeddedBatch> {
    if words.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if max_subwords == 0 {
        return Err(Error::Config {
            reason: "max_subwords must be positive".to_string(),
        });
    }
    let mut embedded = Vec::with_capacity(words.len());
    let mut truncated = 0;
    let mut steps = 0;
    for word in words {
        let e = backend.embed_word(word)?;
        let kept = e.n_subwords().min(max_subwords);
        if e.n_subwords() > max_subwords {
            truncated += 1;
        }
        steps = steps.max(kept);
        embedded.push(e);
    }

    let hidden = backend.hidden_size();
    let mut vectors = Array3::zeros((words.len(), steps, hidden));
    let mut mask = Array2::zeros((words.len(), steps));
    for (b, e) in embedded.iter().enumerate() {
        let kept = e.n_subwords().min(max_subwords);
        for t in 0..kept {
            vectors
                .slice_mut(ndarray::s![b, t, ..])
                .assign(&e.vectors().row(t));
            mask[[b, t]] = 1.0;
        }
    }
    Ok(EmbeddedBatch {
        backend: backend.name().to_string(),
        vectors,
        mask,
        truncated,
    })
}
