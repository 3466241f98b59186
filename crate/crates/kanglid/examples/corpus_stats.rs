//! Load a labeled corpus, report its tag distribution, and split it.

use std::fs;

use kanglid::corpus::{compute_distribution, load_corpus, split_corpus, CorpusFormat, Tag};

fn main() -> kanglid::Result<()> {
    let dir = std::env::temp_dir().join("kanglid-examples");
    fs::create_dir_all(&dir)?;
    let path = dir.join("comments.tsv");
    fs::write(
        &path,
        "ondu\tkn\nmanege\tkn\nhogu\tkn\nnanna\tkn\n\
         good\ten\nmorning\ten\nfriends\ten\ntiffin\ten\n\
         ayther\ten-kn\nmaadidya\ten-kn\n\
         raju\tname\npriya\tname\n\
         bengaluru\tlocation\nmysore\tlocation\n\
         123\tother\n!!\tother\n",
    )?;

    let corpus = load_corpus(&path, CorpusFormat::from_path(&path))?;
    print!("{}", compute_distribution(&corpus)?.render());

    // A stratified split keeps every present tag on both sides.
    let (train, val) = split_corpus(&corpus, 0.5, 7, true)?;
    println!("\ntrain={} val={}", train.len(), val.len());
    for tag in Tag::CANONICAL {
        let count = |c: &kanglid::corpus::LabeledCorpus| c.tags().filter(|&t| t == tag).count();
        println!(
            "{:<10} train={} val={}",
            tag.name(),
            count(&train),
            count(&val)
        );
    }
    Ok(())
}
