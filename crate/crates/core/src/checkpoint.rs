//! JSON checkpoints of trained parameters.
//!
//! Layout (version 1):
//!
//! ```json
//! {
//!   "format": "arladv-checkpoint",
//!   "version": 1,
//!   "dim": K,
//!   "vocab_size": V,
//!   "num_clusters": M,
//!   "vocab_sha256": "<hex digest of the tokens joined by '\n'>",
//!   "vocabulary": ["tok0", "tok1", ...],
//!   "config": { ...training configuration... },
//!   "words": [K*V values, row-major K x V],
//!   "clusters": [K*M values, row-major K x M]
//! }
//! ```
//!
//! Floats are written with shortest round-trip formatting, so a save/load
//! cycle reproduces the parameters bit for bit.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::model::ModelParams;
use crate::trainer::TrainConfig;
use crate::{Error, Result};

pub const FORMAT: &str = "arladv-checkpoint";
pub const VERSION: u32 = 1;

pub fn vocabulary_hash(vocabulary: &Vocabulary) -> String {
    let joined = vocabulary.tokens().join("\n");
    Sha256::digest(joined.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub vocab_size: usize,
    pub num_clusters: usize,
    pub vocab_sha256: String,
    pub vocabulary: Vec<String>,
    pub config: TrainConfig,
    pub words: Vec<f64>,
    pub clusters: Vec<f64>,
}

impl Checkpoint {
    pub fn new(params: &ModelParams, vocabulary: &Vocabulary, config: &TrainConfig) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            dim: params.dim(),
            vocab_size: params.vocab_size(),
            num_clusters: params.num_clusters(),
            vocab_sha256: vocabulary_hash(vocabulary),
            vocabulary: vocabulary.tokens().to_vec(),
            config: config.clone(),
            words: params.words.iter().copied().collect(),
            clusters: params.clusters.iter().copied().collect(),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let shape_err =
            |what: &str| Error::Checkpoint(format!("{what} has the wrong number of values"));
        let words = Array2::from_shape_vec((self.dim, self.vocab_size), self.words.clone())
            .map_err(|_| shape_err("words"))?;
        let clusters = Array2::from_shape_vec((self.dim, self.num_clusters), self.clusters.clone())
            .map_err(|_| shape_err("clusters"))?;
        ModelParams::new(words, clusters)
    }

    /// Errors unless `vocabulary` is the one the checkpoint was trained on.
    pub fn check_vocabulary(&self, vocabulary: &Vocabulary) -> Result<()> {
        if vocabulary_hash(vocabulary) != self.vocab_sha256 {
            return Err(Error::Checkpoint("vocabulary hash mismatch".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.format != FORMAT {
            return Err(Error::Checkpoint(format!(
                "unknown format `{}`",
                ckpt.format
            )));
        }
        if ckpt.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {}",
                ckpt.version
            )));
        }
        if ckpt.vocabulary.len() != ckpt.vocab_size {
            return Err(Error::Checkpoint(
                "vocabulary length disagrees with vocab_size".into(),
            ));
        }
        let vocab = Vocabulary::from_counts(ckpt.vocabulary.iter().map(|t| (t.clone(), 0)));
        if vocabulary_hash(&vocab) != ckpt.vocab_sha256 {
            return Err(Error::Checkpoint(
                "stored vocabulary does not match its hash".into(),
            ));
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_counts(tokens.iter().map(|t| (t.to_string(), 1)))
    }

    #[test]
    fn save_load_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let params = ModelParams::new(
            array![[0.1, 1.0 / 3.0, -2e-300], [5.5, f64::MIN_POSITIVE, 7.0]],
            array![[std::f64::consts::PI], [-0.0]],
        )
        .unwrap();
        let v = vocab(&["a", "b", "c"]);
        Checkpoint::new(&params, &v, &TrainConfig::default())
            .save(&path)
            .unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        loaded.check_vocabulary(&v).unwrap();
        let p = loaded.params().unwrap();
        for (a, b) in p.words.iter().zip(params.words.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(p.clusters, params.clusters);
        assert_eq!(loaded.config, TrainConfig::default());
    }

    #[test]
    fn vocabulary_mismatch_detected() {
        let params = ModelParams::new(array![[1.0, 2.0]], array![[0.0, 1.0]]).unwrap();
        let ckpt = Checkpoint::new(&params, &vocab(&["a", "b"]), &TrainConfig::default());
        assert!(ckpt.check_vocabulary(&vocab(&["b", "a"])).is_err());
    }

    #[test]
    fn rejects_other_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let params = ModelParams::new(array![[1.0]], array![[0.0, 1.0]]).unwrap();
        let mut ckpt = Checkpoint::new(&params, &vocab(&["a"]), &TrainConfig::default());
        ckpt.version = 9;
        ckpt.save(&path).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Checkpoint(_))));
    }
}
