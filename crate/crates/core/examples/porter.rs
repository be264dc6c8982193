//! Stem words with the Porter stemmer.
//!
//! Usage: cargo run --example porter -- caresses ponies relational

use arladv::corpus::porter_stem;

fn main() {
    let words: Vec<String> = std::env::args().skip(1).collect();
    let words = if words.is_empty() {
        [
            "caresses",
            "ponies",
            "relational",
            "generalizations",
            "hopping",
            "running",
            "runner",
        ]
        .map(String::from)
        .to_vec()
    } else {
        words
    };
    for w in words {
        println!("{w:>20} -> {}", porter_stem(&w.to_lowercase()));
    }
}
