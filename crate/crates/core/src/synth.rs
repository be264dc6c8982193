//! Planted-partition corpora with known topic structure.
//!
//! Every topic owns a private vocabulary. A document draws each token from
//! its own topic's vocabulary, except that with probability `cross_noise` the
//! token comes from another topic's vocabulary and, independently, with
//! probability `background_noise` from a background vocabulary shared by all
//! topics. Token strings are lowercase words ending in `x`, which pass the
//! default preprocessing (they are regular, not stopwords, and untouched by
//! the Porter stemmer).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ndarray::Array2;

use crate::corpus::{preprocess, Corpus, PreprocessOptions, RawDocument, Vocabulary};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub topics: usize,
    pub words_per_topic: usize,
    pub documents: usize,
    pub mean_len: usize,
    /// Lengths are uniform in `mean_len - jitter ..= mean_len + jitter`.
    pub len_jitter: usize,
    pub cross_noise: f64,
    pub background_noise: f64,
    pub background_words: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            topics: 5,
            words_per_topic: 60,
            documents: 500,
            mean_len: 8,
            len_jitter: 2,
            cross_noise: 0.1,
            background_noise: 0.0,
            background_words: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    /// One whitespace-joined document per entry.
    pub lines: Vec<String>,
    pub labels: Vec<usize>,
}

const CONSONANTS: &[u8] = b"bcdfghjklmnpqrstvwz";
const VOWELS: &[u8] = b"aeiou";

fn syllables(mut n: usize) -> String {
    let mut s = String::new();
    loop {
        s.push(CONSONANTS[n % CONSONANTS.len()] as char);
        n /= CONSONANTS.len();
        s.push(VOWELS[n % VOWELS.len()] as char);
        n /= VOWELS.len();
        if n == 0 {
            return s;
        }
    }
}

pub fn topic_word(topic: usize, index: usize) -> String {
    format!("t{}{}x", syllables(topic), syllables(index))
}

pub fn background_word(index: usize) -> String {
    format!("n{}x", syllables(index))
}

impl PlantedConfig {
    pub fn generate(&self) -> PlantedCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut labels: Vec<usize> = (0..self.documents).map(|i| i % self.topics).collect();
        labels.shuffle(&mut rng);
        let lo = self.mean_len.saturating_sub(self.len_jitter).max(1);
        let hi = self.mean_len + self.len_jitter;

        let lines = labels
            .iter()
            .map(|&topic| {
                let len = rng.random_range(lo..=hi);
                (0..len)
                    .map(|_| {
                        if self.background_words > 0 && rng.random_bool(self.background_noise) {
                            return background_word(rng.random_range(0..self.background_words));
                        }
                        let source = if self.topics > 1 && rng.random_bool(self.cross_noise) {
                            let other = rng.random_range(0..self.topics - 1);
                            if other >= topic {
                                other + 1
                            } else {
                                other
                            }
                        } else {
                            topic
                        };
                        topic_word(source, rng.random_range(0..self.words_per_topic))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        PlantedCorpus { lines, labels }
    }
}

impl PlantedConfig {
    /// Topic that owns `word`, or `None` for background and unknown words.
    pub fn word_topic(&self, word: &str) -> Option<usize> {
        (0..self.topics).find(|&t| (0..self.words_per_topic).any(|i| topic_word(t, i) == word))
    }

    /// Word embeddings (`dim x vocabulary`) that encode the planted topics:
    /// a topic word is `scale` times the unit vector of its topic's axis,
    /// plus uniform noise in `(-noise, noise)` on every coordinate.
    pub fn informative_embeddings(
        &self,
        vocabulary: &Vocabulary,
        dim: usize,
        scale: f64,
        noise: f64,
    ) -> Array2<f64> {
        assert!(dim >= self.topics, "need one axis per topic");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed);
        let mut words = Array2::zeros((dim, vocabulary.len()));
        for (v, token) in vocabulary.tokens().iter().enumerate() {
            let topic = self.word_topic(token);
            for k in 0..dim {
                let base = if topic == Some(k) { scale } else { 0.0 };
                words[[k, v]] = base + noise * rng.random_range(-1.0..1.0);
            }
        }
        words
    }
}

impl PlantedCorpus {
    /// Encodes the lines without any filtering and attaches the labels.
    pub fn corpus(&self) -> Result<Corpus> {
        let raw = RawDocument::from_lines(self.lines.iter().cloned());
        preprocess(&raw, &PreprocessOptions::raw())?.with_labels(self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::porter_stem;

    #[test]
    fn words_are_distinct_and_survive_preprocessing() {
        let mut seen = std::collections::HashSet::new();
        for t in 0..5 {
            for i in 0..60 {
                let w = topic_word(t, i);
                assert_eq!(porter_stem(&w), w);
                assert!(seen.insert(w));
            }
        }
        for i in 0..60 {
            assert!(seen.insert(background_word(i)));
        }
        let stop = crate::corpus::default_stopwords();
        assert!(seen.iter().all(|w| !stop.contains(w)));
    }

    #[test]
    fn shape_and_balance() {
        let planted = PlantedConfig::default().generate();
        assert_eq!(planted.lines.len(), 500);
        for t in 0..5 {
            assert_eq!(planted.labels.iter().filter(|&&l| l == t).count(), 100);
        }
        for line in &planted.lines {
            let n = line.split_whitespace().count();
            assert!((6..=10).contains(&n));
        }
        let corpus = planted.corpus().unwrap();
        assert_eq!(corpus.len(), 500);
        assert!(corpus.vocabulary.len() <= 300);
    }

    #[test]
    fn topics_are_recoverable_from_words() {
        let cfg = PlantedConfig::default();
        assert_eq!(cfg.word_topic(&topic_word(3, 17)), Some(3));
        assert_eq!(cfg.word_topic(&background_word(2)), None);
        let corpus = cfg.generate().corpus().unwrap();
        let e = cfg.informative_embeddings(&corpus.vocabulary, 8, 1.0, 0.0);
        let id = corpus.vocabulary.index_of(&topic_word(2, 0)).unwrap_or(0);
        let t = cfg
            .word_topic(corpus.vocabulary.token(id).unwrap())
            .unwrap();
        assert_eq!(e[[t, id]], 1.0);
        assert_eq!(e.column(id).sum(), 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = PlantedConfig::default().generate();
        let b = PlantedConfig::default().generate();
        assert_eq!(a, b);
        let c = PlantedConfig {
            seed: 1,
            ..Default::default()
        }
        .generate();
        assert_ne!(a, c);
    }
}
