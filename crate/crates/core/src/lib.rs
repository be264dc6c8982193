//! Short text clustering by jointly learning word and cluster embeddings.
//!
//! Documents are mean-pooled word embeddings. A softmax over cluster
//! embeddings (cluster-level attention) both reconstructs the document and
//! serves as its soft cluster assignment. Training minimizes a cosine
//! reconstruction objective, optionally against norm-bounded adversarial
//! perturbations of the cluster embeddings.
//!
//! Module map:
//!
//! - [`corpus`]: tokenization, stopwords, Porter stemming, vocabulary, labels
//! - [`model`]: parameters, forward quantities, losses, analytic gradients
//! - [`trainer`]: initialization, k-means, Adam, the minibatch loop, baseline
//! - [`metrics`]: NMI, ARI and Hungarian-matched accuracy
//! - [`embeddings`] / [`checkpoint`]: word2vec text input, parameter dumps
//! - [`cli`]: the `arladv` command line front end
//! - [`synth`]: planted-partition corpora for experiments and tests

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod metrics;
pub mod model;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
