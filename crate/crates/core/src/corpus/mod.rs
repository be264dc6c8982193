//! Raw text ingestion and the preprocessing pipeline.
//!
//! Each document goes through whitespace tokenization, lowercasing,
//! stopword removal, irregular-token removal and Porter stemming. A
//! frequency cutoff (counted on stems) is then applied and the surviving
//! tokens form the vocabulary. Documents left empty are dropped and
//! recorded so gold labels can still be aligned.

mod porter;
mod stopwords;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub use porter::porter_stem;
pub use stopwords::{default_stopwords, load_stopwords};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: usize,
    pub text: String,
}

impl RawDocument {
    /// Builds documents with dense ids in input order.
    pub fn from_lines<I, S>(lines: I) -> Vec<RawDocument>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        lines
            .into_iter()
            .enumerate()
            .map(|(id, text)| RawDocument {
                id,
                text: text.into(),
            })
            .collect()
    }
}

/// Reads a corpus file with one document per line.
pub fn read_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(RawDocument::from_lines(text.lines()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    frequencies: Vec<usize>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from `(token, frequency)` pairs in id order.
    pub fn from_counts(entries: impl IntoIterator<Item = (String, usize)>) -> Self {
        let mut vocab = Vocabulary::default();
        for (token, freq) in entries {
            if vocab.index.contains_key(&token) {
                continue;
            }
            vocab.index.insert(token.clone(), vocab.tokens.len());
            vocab.tokens.push(token);
            vocab.frequencies.push(freq);
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn frequency(&self, id: usize) -> usize {
        self.frequencies[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDocument {
    /// Id of the originating [`RawDocument`].
    pub id: usize,
    pub token_ids: Vec<usize>,
}

impl EncodedDocument {
    pub fn new(id: usize, token_ids: Vec<usize>) -> Self {
        EncodedDocument { id, token_ids }
    }

    /// Number of tokens, the document length used for mean pooling.
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<EncodedDocument>,
    pub vocabulary: Vocabulary,
    /// Dense gold labels aligned to `documents`.
    pub labels: Option<Vec<usize>>,
    /// Ids removed because preprocessing emptied them.
    pub dropped_ids: Vec<usize>,
    /// Number of raw documents that went into preprocessing.
    pub original_len: usize,
}

impl Corpus {
    /// Assembles a corpus from already-encoded documents (no preprocessing).
    pub fn from_encoded(documents: Vec<EncodedDocument>, vocabulary: Vocabulary) -> Self {
        let original_len = documents.iter().map(|d| d.id + 1).max().unwrap_or(0);
        let kept: HashSet<usize> = documents.iter().map(|d| d.id).collect();
        let dropped_ids = (0..original_len).filter(|i| !kept.contains(i)).collect();
        Corpus {
            documents,
            vocabulary,
            labels: None,
            dropped_ids,
            original_len,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        self.labels = Some(align_labels(&labels, &self)?);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopwordSource {
    None,
    /// The bundled 318-word English list.
    Builtin,
    Custom(HashSet<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub lowercase: bool,
    pub stopwords: StopwordSource,
    /// Drop tokens with any character outside `a-z` (checked after lowercasing).
    pub remove_irregular: bool,
    pub stem: bool,
    pub min_freq: usize,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            lowercase: true,
            stopwords: StopwordSource::Builtin,
            remove_irregular: true,
            stem: true,
            min_freq: 5,
        }
    }
}

impl PreprocessOptions {
    /// Whitespace split only, everything else disabled.
    pub fn raw() -> Self {
        PreprocessOptions {
            lowercase: false,
            stopwords: StopwordSource::None,
            remove_irregular: false,
            stem: false,
            min_freq: 1,
        }
    }
}

fn is_regular(token: &str) -> bool {
    token.bytes().all(|b| b.is_ascii_lowercase())
}

/// Per-document token pipeline up to (not including) the frequency cutoff.
/// Returns the surviving tokens and the name of the last step that emptied
/// the document, if any.
fn filter_tokens(
    text: &str,
    options: &PreprocessOptions,
    stopwords: Option<&HashSet<String>>,
) -> (Vec<String>, &'static str) {
    let mut tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return (tokens, "tokenization");
    }
    if options.lowercase {
        for t in &mut tokens {
            *t = t.to_lowercase();
        }
    }
    if let Some(stop) = stopwords {
        tokens.retain(|t| !stop.contains(t));
        if tokens.is_empty() {
            return (tokens, "stopword removal");
        }
    }
    if options.remove_irregular {
        tokens.retain(|t| is_regular(t));
        if tokens.is_empty() {
            return (tokens, "irregular-token removal");
        }
    }
    if options.stem {
        for t in &mut tokens {
            *t = porter_stem(t);
        }
    }
    (tokens, "")
}

/// Runs the full preprocessing pipeline and builds the vocabulary.
pub fn preprocess(raw: &[RawDocument], options: &PreprocessOptions) -> Result<Corpus> {
    if options.min_freq == 0 {
        return Err(Error::Config("min_freq must be at least 1".into()));
    }
    let builtin;
    let stopwords = match &options.stopwords {
        StopwordSource::None => None,
        StopwordSource::Builtin => {
            builtin = default_stopwords();
            Some(&builtin)
        }
        StopwordSource::Custom(set) => Some(set),
    };

    let filtered: Vec<(Vec<String>, &'static str)> = raw
        .iter()
        .map(|doc| filter_tokens(&doc.text, options, stopwords))
        .collect();

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (tokens, _) in &filtered {
        for t in tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }

    let mut vocab_entries: Vec<(String, usize)> = Vec::new();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut documents = Vec::with_capacity(raw.len());
    let mut dropped_ids = Vec::new();
    let mut last_emptying_step = "tokenization";

    for (doc, (tokens, step)) in raw.iter().zip(&filtered) {
        let mut token_ids = Vec::with_capacity(tokens.len());
        for t in tokens {
            let freq = counts[t.as_str()];
            if freq < options.min_freq {
                continue;
            }
            let id = *ids.entry(t.as_str()).or_insert_with(|| {
                vocab_entries.push((t.clone(), freq));
                vocab_entries.len() - 1
            });
            token_ids.push(id);
        }
        if token_ids.is_empty() {
            dropped_ids.push(doc.id);
            last_emptying_step = if step.is_empty() {
                "frequency filtering"
            } else {
                step
            };
        } else {
            documents.push(EncodedDocument::new(doc.id, token_ids));
        }
    }

    if documents.is_empty() {
        return Err(Error::EmptyCorpus {
            step: last_emptying_step.to_string(),
        });
    }

    Ok(Corpus {
        documents,
        vocabulary: Vocabulary::from_counts(vocab_entries),
        labels: None,
        dropped_ids,
        original_len: raw.len(),
    })
}

/// Parses a label file: one integer per line. Blank lines are an error.
pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.trim().parse::<i64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected an integer label: {e}"),
            })
        })
        .collect()
}

/// Maps arbitrary label values to 0..T-1 in order of first appearance.
pub fn remap_dense<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Vec<usize> {
    let mut seen: HashMap<T, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(*l).or_insert(next)
        })
        .collect()
}

/// Keeps the labels of retained documents and densifies their values.
fn align_labels<T: Copy + Eq + std::hash::Hash>(
    labels: &[T],
    corpus: &Corpus,
) -> Result<Vec<usize>> {
    if labels.len() != corpus.original_len {
        return Err(Error::LabelCount {
            labels: labels.len(),
            documents: corpus.original_len,
        });
    }
    let kept: Vec<T> = corpus.documents.iter().map(|d| labels[d.id]).collect();
    Ok(remap_dense(&kept))
}

/// Reads a label file aligned to the original corpus lines and attaches it.
pub fn load_labels(path: &Path, corpus: Corpus) -> Result<Corpus> {
    let labels = read_labels(path)?;
    let aligned = align_labels(&labels, &corpus)?;
    Ok(Corpus {
        labels: Some(aligned),
        ..corpus
    })
}
