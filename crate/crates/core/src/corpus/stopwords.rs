use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// 318-word English list (the Glasgow IR group list also shipped by scikit-learn).
const ENGLISH: &str = include_str!("stopwords_en.txt");

pub fn default_stopwords() -> HashSet<String> {
    parse(ENGLISH)
}

/// Reads a stopword file, one token per line. Tokens are lowercased.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse(&text))
}

fn parse(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}
