//! Run the preprocessing pipeline on a few lines and show what survives.
//!
//! Usage: cargo run --example preprocess [-- CORPUS_FILE]

use arladv::corpus::{preprocess, read_corpus, PreprocessOptions, RawDocument};

fn main() -> arladv::Result<()> {
    let raw = match std::env::args().nth(1) {
        Some(path) => read_corpus(path.as_ref())?,
        None => RawDocument::from_lines([
            "Running runners run in the RUNNING race",
            "The connection connects connected nodes, 42 times!",
            "a the of",
            "Running connections",
        ]),
    };
    let options = PreprocessOptions {
        min_freq: 2,
        ..PreprocessOptions::default()
    };
    let corpus = preprocess(&raw, &options)?;
    println!(
        "kept {} of {} documents, dropped ids {:?}",
        corpus.len(),
        corpus.original_len,
        corpus.dropped_ids
    );
    for (id, token) in corpus.vocabulary.tokens().iter().enumerate() {
        println!(
            "  {id:>3} {token:<12} frequency {}",
            corpus.vocabulary.frequency(id)
        );
    }
    for doc in &corpus.documents {
        let tokens: Vec<&str> = doc
            .token_ids
            .iter()
            .map(|&t| corpus.vocabulary.token(t).unwrap())
            .collect();
        println!("doc {}: {}", doc.id, tokens.join(" "));
    }
    Ok(())
}
