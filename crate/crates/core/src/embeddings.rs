//! Textual word2vec embedding files.
//!
//! The first line is `<count> <dim>`, followed by one `<token> v1 ... vdim`
//! line per word, space separated.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::ArrayView2;

use crate::corpus::Vocabulary;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    /// Vectors in file order; the first occurrence of a token wins.
    pub entries: Vec<(String, Vec<f64>)>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.entries[i].1.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_word2vec(path: &Path) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_word2vec(&text, path)
}

/// Parses word2vec text. `origin` is only used in error messages.
pub fn parse_word2vec(text: &str, origin: &Path) -> Result<EmbeddingTable> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing `<count> <dim>` header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|e| err(1, format!("bad {what} in header: {e}")))
    };
    if fields.len() != 2 {
        return Err(err(1, "header must be `<count> <dim>`".into()));
    }
    let count = parse_usize(fields[0], "count")?;
    let dim = parse_usize(fields[1], "dimension")?;

    let mut entries = Vec::with_capacity(count);
    let mut index = HashMap::new();
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line").to_string();
        let values = parts
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| err(i + 1, format!("bad value for `{token}`: {e}")))?;
        if values.len() != dim {
            return Err(err(
                i + 1,
                format!("`{token}` has {} values, expected {dim}", values.len()),
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(err(i + 1, format!("non-finite value for `{token}`")));
        }
        if !index.contains_key(&token) {
            index.insert(token.clone(), entries.len());
            entries.push((token, values));
        }
    }
    Ok(EmbeddingTable {
        dim,
        entries,
        index,
    })
}

/// Writes `words` (dim x |V|) as word2vec text, one line per vocabulary entry.
pub fn write_word2vec(path: &Path, vocabulary: &Vocabulary, words: ArrayView2<f64>) -> Result<()> {
    let mut out = format!("{} {}\n", vocabulary.len(), words.nrows());
    for (id, token) in vocabulary.tokens().iter().enumerate() {
        out.push_str(token);
        for v in words.column(id) {
            write!(out, " {v}").expect("write to string");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
