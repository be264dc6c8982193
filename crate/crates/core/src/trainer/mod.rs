//! Parameter initialization and the adversarial minibatch training loop.
//!
//! Each epoch shuffles the documents into batches. For every batch the
//! trainer samples in-batch negatives, builds the perturbation required by
//! the mode (none, fast-gradient on clusters or words, or random on the
//! sphere), evaluates `J = J1 + alpha * J2` with its gradients, and takes one
//! Adam step. Cluster assignments are read off the clean attention.

mod adam;
mod kmeans;
mod tfidf;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EncodedDocument};
use crate::embeddings::{load_word2vec, EmbeddingTable};
use crate::model::{
    self, attention_matrix, doc_embed, BatchEvaluation, LossSwitches, ModelParams, ObjectiveConfig,
    Perturbation,
};
use crate::{Error, Result};

pub use adam::{AdamConfig, AdamState};
pub use kmeans::{distinct_rows, kmeans, kmeans_with, KMeans, KMeansOptions};
pub use tfidf::tfidf_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Clean objective only.
    Arl,
    /// Fast-gradient perturbation of the cluster embeddings.
    ArlAdv,
    /// Random perturbation of the cluster embeddings, same norm.
    ArlRandom,
    /// Fast-gradient perturbation of the batch word embeddings.
    ArlAdvWord,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Arl, Mode::ArlAdv, Mode::ArlRandom, Mode::ArlAdvWord];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Arl => "arl",
            Mode::ArlAdv => "arl-adv",
            Mode::ArlRandom => "arl-random",
            Mode::ArlAdvWord => "arl-adv-word",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "path")]
pub enum Init {
    Random,
    Pretrained(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainConfig {
    pub clusters: usize,
    pub dim: usize,
    pub batch_size: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub neg_count: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub mode: Mode,
    pub train_words: bool,
    pub train_clusters: bool,
    pub use_pairwise: bool,
    pub use_pointwise: bool,
    pub init: Init,
    pub kmeans_init: bool,
    pub kmeans_restarts: usize,
    /// Stop when fewer than 0.1% of documents change cluster for 3 epochs in a row.
    pub early_stop: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            clusters: 2,
            dim: 300,
            batch_size: 64,
            alpha: 1.0,
            epsilon: 50.0,
            gamma: 1.0,
            neg_count: 5,
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 1,
            mode: Mode::ArlAdv,
            train_words: true,
            train_clusters: true,
            use_pairwise: true,
            use_pointwise: true,
            init: Init::Random,
            kmeans_init: true,
            kmeans_restarts: 10,
            early_stop: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.clusters < 2 {
            return fail("clusters must be at least 2");
        }
        if self.dim < 1 {
            return fail("dim must be at least 1");
        }
        if self.batch_size < 2 {
            return fail("batch-size must be at least 2");
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return fail("epsilon must be non-negative");
        }
        if !self.alpha.is_finite() || !self.gamma.is_finite() {
            return fail("alpha and gamma must be finite");
        }
        if !self.use_pairwise && !self.use_pointwise {
            return fail("at least one of use-pairwise / use-pointwise must be enabled");
        }
        if self.use_pairwise && self.neg_count == 0 {
            return fail("neg-count must be at least 1 when the pairwise loss is enabled");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return fail("learning-rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("adam betas must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn objective(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            gamma: self.gamma,
            alpha: self.alpha,
            epsilon: self.epsilon,
            losses: LossSwitches {
                pairwise: self.use_pairwise,
                pointwise: self.use_pointwise,
            },
            train_words: self.train_words,
            train_clusters: self.train_clusters,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    /// Number of scalar parameters the optimizer updates.
    pub fn trained_parameters(&self, vocab_size: usize) -> usize {
        let mut n = 0;
        if self.train_words {
            n += self.dim * vocab_size;
        }
        if self.train_clusters {
            n += self.dim * self.clusters;
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub max_probs: Vec<f64>,
    /// Full attention rows (documents x clusters), when available.
    pub attn: Option<Array2<f64>>,
    /// Mean objective per document, one entry per epoch.
    pub history: Vec<f64>,
}

impl ClusterResult {
    pub fn mean_max_prob(&self) -> f64 {
        if self.max_probs.is_empty() {
            return 0.0;
        }
        self.max_probs.iter().sum::<f64>() / self.max_probs.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_objective: f64,
    /// Fraction of documents whose cluster changed since the previous epoch.
    pub churn: f64,
}

fn uniform_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    half_width: f64,
    rng: &mut R,
) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-half_width..half_width))
}

/// Mean-pooled embeddings of every document, one per row.
pub fn document_matrix(words: &Array2<f64>, docs: &[EncodedDocument]) -> Array2<f64> {
    let mut out = Array2::zeros((docs.len(), words.nrows()));
    for (mut row, doc) in out.rows_mut().into_iter().zip(docs) {
        row.assign(&doc_embed(words.view(), doc).vector);
    }
    out
}

/// Builds `E` and `C`.
///
/// `E` is uniform in `(-0.5/K, 0.5/K)`, overwritten by `pretrained` vectors
/// where the vocabulary token is present. With `kmeans_init` the columns of
/// `C` are k-means centroids of the document embeddings, otherwise `C` is
/// drawn like `E`.
pub fn init_params<R: Rng + ?Sized>(
    corpus: &Corpus,
    config: &TrainConfig,
    pretrained: Option<&EmbeddingTable>,
    rng: &mut R,
) -> Result<ModelParams> {
    let k = config.dim;
    let half = 0.5 / k as f64;
    let mut words = uniform_matrix(k, corpus.vocabulary.len(), half, rng);
    if let Some(table) = pretrained {
        if table.dim != k {
            return Err(Error::EmbeddingDim {
                expected: k,
                found: table.dim,
            });
        }
        for (id, token) in corpus.vocabulary.tokens().iter().enumerate() {
            if let Some(v) = table.get(token) {
                words.column_mut(id).assign(&Array1::from(v.to_vec()));
            }
        }
    }

    let clusters = if config.kmeans_init {
        let points = document_matrix(&words, &corpus.documents);
        let options = KMeansOptions {
            restarts: config.kmeans_restarts.max(1),
            ..KMeansOptions::default()
        };
        let km = kmeans_with(points.view(), config.clusters, &options, rng)?;
        km.centroids.reversed_axes()
    } else {
        uniform_matrix(k, config.clusters, half, rng)
    };
    ModelParams::new(words, clusters)
}

/// Clean-cluster attention for every document; ties go to the lowest index.
pub fn extract_assignments(params: &ModelParams, corpus: &Corpus) -> ClusterResult {
    let attn = attention_matrix(params, &corpus.documents);
    let mut assignments = Vec::with_capacity(corpus.len());
    let mut max_probs = Vec::with_capacity(corpus.len());
    for row in attn.rows() {
        let best = model::argmax(row);
        assignments.push(best);
        max_probs.push(row[best]);
    }
    ClusterResult {
        assignments,
        max_probs,
        attn: Some(attn),
        history: Vec::new(),
    }
}

/// Splits shuffled document positions into batches, folding a trailing
/// singleton into the previous batch so every document has a negative.
fn make_batches(order: &[usize], batch_size: usize) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        let last = batches.pop().expect("non-empty");
        batches.last_mut().expect("non-empty").extend(last);
    }
    batches
}

/// For each batch position, `count` distinct other positions (clipped to batch - 1).
pub fn sample_negatives<R: Rng + ?Sized>(
    batch_len: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let n = count.min(batch_len.saturating_sub(1));
    (0..batch_len)
        .map(|p| {
            index::sample(rng, batch_len - 1, n)
                .into_iter()
                .map(|j| if j >= p { j + 1 } else { j })
                .collect()
        })
        .collect()
}

/// Objective and gradients of one batch for the configured mode.
pub fn batch_step<R: Rng + ?Sized>(
    params: &ModelParams,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    config: &TrainConfig,
    rng: &mut R,
) -> Result<BatchEvaluation> {
    use crate::model::{cluster_perturbation_from, combine, evaluate, word_perturbation_from};
    let cfg = config.objective();
    let clean = evaluate(params, None, None, batch, negatives, &cfg, true)?;
    let adversarial = match config.mode {
        Mode::Arl => None,
        Mode::ArlAdv if cfg.alpha != 0.0 => {
            let pert = cluster_perturbation_from(&clean.gradients.clusters, &cfg);
            Some(evaluate(
                params,
                None,
                Some(&pert.delta),
                batch,
                negatives,
                &cfg,
                true,
            )?)
        }
        Mode::ArlAdvWord if cfg.alpha != 0.0 => {
            let pert = word_perturbation_from(&clean.gradients.words, batch, &cfg);
            Some(evaluate(
                params,
                Some(&pert),
                None,
                batch,
                negatives,
                &cfg,
                true,
            )?)
        }
        Mode::ArlRandom => {
            let pert =
                Perturbation::random_sphere(params.dim(), params.num_clusters(), cfg.epsilon, rng);
            if cfg.alpha != 0.0 {
                Some(evaluate(
                    params,
                    None,
                    Some(&pert.delta),
                    batch,
                    negatives,
                    &cfg,
                    true,
                )?)
            } else {
                None
            }
        }
        Mode::ArlAdv | Mode::ArlAdvWord => None,
    };
    Ok(combine(clean, adversarial, &cfg))
}

pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<(ModelParams, ClusterResult)> {
    train_with_observer(corpus, config, |_| {})
}

/// Runs the full training loop, reporting each finished epoch to `observer`.
pub fn train_with_observer(
    corpus: &Corpus,
    config: &TrainConfig,
    mut observer: impl FnMut(&EpochReport),
) -> Result<(ModelParams, ClusterResult)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus {
            step: "loading".into(),
        });
    }
    if config.use_pairwise && corpus.len() < 2 {
        return Err(Error::Config(
            "the pairwise loss needs at least two documents".into(),
        ));
    }
    let pretrained = match &config.init {
        Init::Random => None,
        Init::Pretrained(path) => Some(load_word2vec(path)?),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(corpus, config, pretrained.as_ref(), &mut rng)?;
    let mut adam = AdamState::new(&params);
    let adam_cfg = config.adam();

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut previous = extract_assignments(&params, corpus).assignments;
    let mut quiet_epochs = 0;
    let mut batch_docs: Vec<EncodedDocument> = Vec::with_capacity(config.batch_size + 1);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, positions) in make_batches(&order, config.batch_size).iter().enumerate() {
            batch_docs.clear();
            batch_docs.extend(positions.iter().map(|&i| corpus.documents[i].clone()));
            let negatives = if config.use_pairwise {
                sample_negatives(batch_docs.len(), config.neg_count, &mut rng)
            } else {
                vec![Vec::new(); batch_docs.len()]
            };
            let eval = batch_step(&params, &batch_docs, &negatives, config, &mut rng)?;
            if !eval.value.is_finite() {
                return Err(Error::NonFiniteObjective { epoch, batch: b });
            }
            total += eval.value;
            adam.step(
                &mut params,
                &eval.gradients,
                &adam_cfg,
                config.train_words,
                config.train_clusters,
            );
        }
        let mean = total / corpus.len() as f64;
        history.push(mean);

        let current = extract_assignments(&params, corpus).assignments;
        let changed = current
            .iter()
            .zip(&previous)
            .filter(|(a, b)| a != b)
            .count();
        let churn = changed as f64 / corpus.len() as f64;
        previous = current;
        observer(&EpochReport {
            epoch,
            mean_objective: mean,
            churn,
        });
        if config.early_stop {
            quiet_epochs = if churn < 1e-3 { quiet_epochs + 1 } else { 0 };
            if quiet_epochs >= 3 {
                break;
            }
        }
    }

    let mut result = extract_assignments(&params, corpus);
    result.history = history;
    Ok((params, result))
}

/// K-means on L2-normalized TF-IDF rows.
pub fn baseline_kmeans_tfidf(corpus: &Corpus, config: &TrainConfig) -> Result<ClusterResult> {
    let features = tfidf_matrix(corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let options = KMeansOptions {
        restarts: config.kmeans_restarts.max(1),
        ..KMeansOptions::default()
    };
    let km = kmeans_with(features.view(), config.clusters, &options, &mut rng)?;
    Ok(ClusterResult {
        max_probs: vec![1.0; km.assignments.len()],
        assignments: km.assignments,
        attn: None,
        history: Vec::new(),
    })
}
