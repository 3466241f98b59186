//! Embed words with the offline hash backend and inspect the registry.

use kanglid::embedding::{embed_batch, load_backend_by_name, registry, DEFAULT_MAX_SUBWORDS};

fn main() -> kanglid::Result<()> {
    println!("registered backends:");
    for cfg in registry() {
        println!(
            "  {:<32} hidden={:<5} blocks={:<3} casing={:?}",
            cfg.name,
            cfg.hidden_size,
            cfg.transformer_blocks.unwrap_or(0),
            cfg.casing
        );
    }

    let backend = load_backend_by_name("hash-64", None)?;
    println!("\nusing {} (dim {})", backend.name(), backend.hidden_size());
    for word in ["bengaluru", "tiffin", "maadidya"] {
        let emb = backend.embed_word(word)?;
        let head: Vec<f64> = emb
            .pooled()
            .iter()
            .take(3)
            .map(|v| (v * 1e4).round() / 1e4)
            .collect();
        println!(
            "{word:<10} {} subword vectors, pooled[..3] = {head:?}",
            emb.n_subwords()
        );
    }

    // The backend is a pure function of the word: reruns match exactly.
    let a = backend.embed_word("ondu")?;
    let b = backend.embed_word("ondu")?;
    assert_eq!(a.vectors(), b.vectors());

    let batch = embed_batch(
        backend.as_ref(),
        &["ondu", "bengaluru"],
        DEFAULT_MAX_SUBWORDS,
    )?;
    println!(
        "\nbatch of 2: tensor {:?}, mask {:?}, {} truncated",
        batch.vectors.dim(),
        batch.mask.dim(),
        batch.truncated
    );
    Ok(())
}
