//! Parameters and forward quantities of the attentive clustering model.
//!
//! A document embedding is the mean of its word columns in `E` (K x |V|).
//! Attention over the M cluster columns of the effective cluster matrix is a
//! softmax of dot products, and the reconstruction is the attention-weighted
//! sum of those columns. Relevance between two embeddings is their cosine.

mod objective;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::corpus::EncodedDocument;
use crate::{Error, Result};

pub use objective::{
    adversarial_step, evaluate, gradients, objective_j1, objective_j2, objective_total,
    word_adversarial_step, BatchEvaluation, Gradients, LossSwitches, ObjectiveConfig,
    WordPerturbation,
};
pub(crate) use objective::{cluster_perturbation_from, combine, word_perturbation_from};

/// Norms below this are treated as zero.
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Word embeddings, one column per vocabulary entry (K x |V|).
    pub words: Array2<f64>,
    /// Cluster embeddings, one column per cluster (K x M).
    pub clusters: Array2<f64>,
}

impl ModelParams {
    pub fn new(words: Array2<f64>, clusters: Array2<f64>) -> Result<Self> {
        if words.nrows() != clusters.nrows() {
            return Err(Error::Config(format!(
                "word embeddings have {} rows but cluster embeddings have {}",
                words.nrows(),
                clusters.nrows()
            )));
        }
        let params = ModelParams { words, clusters };
        if !params.is_finite() {
            return Err(Error::Config(
                "parameters contain non-finite entries".into(),
            ));
        }
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        self.words.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.words.ncols()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.words
            .iter()
            .chain(self.clusters.iter())
            .all(|v| v.is_finite())
    }

    /// Cluster matrix with a perturbation added.
    pub fn perturbed_clusters(&self, pert: &Perturbation) -> Array2<f64> {
        &self.clusters + &pert.delta
    }
}

/// Additive perturbation of the cluster matrix with a per-column norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub delta: Array2<f64>,
    pub epsilon: f64,
}

impl Perturbation {
    pub fn zeros(dim: usize, clusters: usize) -> Self {
        Perturbation {
            delta: Array2::zeros((dim, clusters)),
            epsilon: 0.0,
        }
    }

    /// Each column drawn uniformly from the sphere of radius `epsilon`.
    pub fn random_sphere<R: Rng + ?Sized>(
        dim: usize,
        clusters: usize,
        epsilon: f64,
        rng: &mut R,
    ) -> Self {
        let mut delta = Array2::zeros((dim, clusters));
        for mut col in delta.columns_mut() {
            loop {
                for v in col.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let norm = l2_norm(col.view());
                if norm > NORM_FLOOR {
                    col.mapv_inplace(|v| v * epsilon / norm);
                    break;
                }
            }
        }
        Perturbation { delta, epsilon }
    }

    /// Column norms of `delta`.
    pub fn column_norms(&self) -> Vec<f64> {
        self.delta.columns().into_iter().map(l2_norm).collect()
    }

    pub fn within_bound(&self) -> bool {
        self.column_norms()
            .iter()
            .all(|&n| n <= self.epsilon + 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocEmbedding {
    pub doc_id: usize,
    pub vector: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionDistribution {
    pub doc_id: usize,
    pub probs: Array1<f64>,
}

impl AttentionDistribution {
    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(self.probs.view())
    }
}

pub(crate) fn argmax(values: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn l2_norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Mean of the word columns indexed by the document's tokens.
///
/// Panics if the document is empty or references a column outside `words`.
pub fn doc_embed(words: ArrayView2<f64>, doc: &EncodedDocument) -> DocEmbedding {
    assert!(!doc.is_empty(), "document {} has no tokens", doc.id);
    let mut vector = Array1::zeros(words.nrows());
    for &t in &doc.token_ids {
        assert!(
            t < words.ncols(),
            "token id {t} out of range for vocabulary of {}",
            words.ncols()
        );
        vector += &words.column(t);
    }
    vector /= doc.len() as f64;
    DocEmbedding {
        doc_id: doc.id,
        vector,
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out = logits.mapv(|v| (v - max).exp());
    let sum = out.sum();
    out /= sum;
    out
}

/// Cluster-level attention: softmax over `c_m . d` for every column of `clusters`.
pub fn attention(clusters: ArrayView2<f64>, doc: &DocEmbedding) -> AttentionDistribution {
    let logits = clusters.t().dot(&doc.vector);
    AttentionDistribution {
        doc_id: doc.doc_id,
        probs: softmax(logits.view()),
    }
}

/// Attention-weighted combination of the cluster columns.
pub fn reconstruct(clusters: ArrayView2<f64>, attn: &AttentionDistribution) -> DocEmbedding {
    DocEmbedding {
        doc_id: attn.doc_id,
        vector: clusters.dot(&attn.probs),
    }
}

/// Cosine similarity, 0 when either vector is (numerically) zero.
pub fn relevance(a: &DocEmbedding, b: &DocEmbedding) -> f64 {
    cosine(a.vector.view(), b.vector.view())
}

pub(crate) fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na < NORM_FLOOR || nb < NORM_FLOOR {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Mean hinge `max(0, gamma - i_rel + neg_rel)` over the negatives.
pub fn loss_pairwise(i_rel: f64, neg_rels: &[f64], gamma: f64) -> Result<f64> {
    if neg_rels.is_empty() {
        return Err(Error::Config(
            "pairwise loss needs at least one negative document".into(),
        ));
    }
    let total: f64 = neg_rels.iter().map(|&n| (gamma - i_rel + n).max(0.0)).sum();
    Ok(total / neg_rels.len() as f64)
}

pub fn loss_pointwise(i_rel: f64) -> f64 {
    -i_rel
}

/// Attention rows for every document in `docs`, using the unperturbed clusters.
pub fn attention_matrix(params: &ModelParams, docs: &[EncodedDocument]) -> Array2<f64> {
    let mut out = Array2::zeros((docs.len(), params.num_clusters()));
    for (mut row, doc) in out.axis_iter_mut(Axis(0)).zip(docs) {
        let d = doc_embed(params.words.view(), doc);
        row.assign(&attention(params.clusters.view(), &d).probs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn emb(v: Array1<f64>) -> DocEmbedding {
        DocEmbedding {
            doc_id: 0,
            vector: v,
        }
    }

    #[test]
    fn doc_embed_means_columns() {
        let words = array![[1.0, 0.0], [0.0, 1.0]];
        let one = doc_embed(words.view(), &EncodedDocument::new(0, vec![0]));
        assert_eq!(one.vector, array![1.0, 0.0]);
        let two = doc_embed(words.view(), &EncodedDocument::new(0, vec![0, 1]));
        assert_eq!(two.vector, array![0.5, 0.5]);
        let three = doc_embed(words.view(), &EncodedDocument::new(0, vec![0, 0, 1]));
        assert_abs_diff_eq!(three.vector[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(three.vector[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn doc_embed_rejects_bad_token() {
        let words = Array2::<f64>::zeros((2, 2));
        doc_embed(words.view(), &EncodedDocument::new(0, vec![5]));
    }

    #[test]
    fn attention_examples() {
        let c = array![[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        let a = attention(c.view(), &emb(array![0.3, -0.2]));
        for p in a.probs.iter() {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }

        // logits (ln 3, 0)
        let c = array![[3f64.ln(), 0.0]];
        let a = attention(c.view(), &emb(array![1.0]));
        assert_abs_diff_eq!(a.probs[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(a.probs[1], 0.25, epsilon = 1e-15);

        let c = array![[5.0, -3.0, 0.1], [2.0, 7.0, -1.0]];
        let a = attention(c.view(), &emb(array![0.0, 0.0]));
        assert!(a.probs.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn attention_survives_huge_logits() {
        let c = array![[1000.0, -1000.0]];
        let a = attention(c.view(), &emb(array![5.0]));
        assert!(a.probs.iter().all(|p| p.is_finite()));
        assert_abs_diff_eq!(a.probs.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reconstruct_examples() {
        let c = array![[4.0, 0.0], [0.0, 8.0]];
        let attn = AttentionDistribution {
            doc_id: 3,
            probs: array![0.75, 0.25],
        };
        let r = reconstruct(c.view(), &attn);
        assert_eq!(r.vector, array![3.0, 2.0]);
        assert_eq!(r.doc_id, 3);

        let c = array![[1.0, 0.0], [0.0, 1.0]];
        let uniform = AttentionDistribution {
            doc_id: 0,
            probs: array![0.5, 0.5],
        };
        assert_eq!(reconstruct(c.view(), &uniform).vector, array![0.5, 0.5]);

        let c = array![[1.0, 9.0], [2.0, -4.0]];
        let peaked = AttentionDistribution {
            doc_id: 0,
            probs: array![1e-12, 1.0 - 1e-12],
        };
        let r = reconstruct(c.view(), &peaked);
        assert_abs_diff_eq!(r.vector[0], 9.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.vector[1], -4.0, epsilon = 1e-10);
    }

    #[test]
    fn relevance_examples() {
        let a = emb(array![0.3, -1.2, 2.0]);
        assert_abs_diff_eq!(relevance(&a, &a), 1.0, epsilon = 1e-15);
        assert_eq!(
            relevance(&emb(array![1.0, 0.0]), &emb(array![0.0, 3.0])),
            0.0
        );
        assert_eq!(
            relevance(&emb(array![1.0, 0.0]), &emb(array![-2.0, 0.0])),
            -1.0
        );
        assert_eq!(
            relevance(&emb(array![0.0, 0.0]), &emb(array![1.0, 0.0])),
            0.0
        );
        assert_eq!(
            relevance(&emb(array![1e-13, 0.0]), &emb(array![1.0, 0.0])),
            0.0
        );
    }

    #[test]
    fn pairwise_loss_examples() {
        assert_eq!(loss_pairwise(1.0, &[-1.0, -1.0], 1.0).unwrap(), 0.0);
        assert_eq!(loss_pairwise(0.0, &[0.0], 1.0).unwrap(), 1.0);
        assert_eq!(loss_pairwise(0.5, &[0.0, 0.5], 1.0).unwrap(), 0.75);
        assert!(loss_pairwise(0.5, &[], 1.0).is_err());
    }

    #[test]
    fn pointwise_loss_examples() {
        assert_eq!(loss_pointwise(1.0), -1.0);
        assert_eq!(loss_pointwise(0.0), 0.0);
        assert_eq!(loss_pointwise(-0.3), 0.3);
    }

    #[test]
    fn sphere_perturbation_has_exact_norms() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let p = Perturbation::random_sphere(6, 4, 2.5, &mut rng);
        for n in p.column_norms() {
            assert_abs_diff_eq!(n, 2.5, epsilon = 1e-12);
        }
        assert!(p.within_bound());
    }

    use rand::SeedableRng;

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, len)
    }

    proptest! {
        #[test]
        fn attention_is_a_distribution(c in vec_strategy(12), d in vec_strategy(3)) {
            let c = Array2::from_shape_vec((3, 4), c).unwrap();
            let a = attention(c.view(), &emb(Array1::from(d)));
            prop_assert!((a.probs.sum() - 1.0).abs() < 1e-9);
            prop_assert!(a.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }

        #[test]
        fn softmax_shift_invariance(logits in vec_strategy(5), shift in -50.0f64..50.0) {
            let l = Array1::from(logits);
            let a = softmax(l.view());
            let b = softmax(l.mapv(|v| v + shift).view());
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn relevance_is_bounded(a in vec_strategy(4), b in vec_strategy(4)) {
            let a = emb(Array1::from(a));
            let b = emb(Array1::from(b));
            let r = relevance(&a, &b);
            prop_assert!((-1.0..=1.0).contains(&r));
            if l2_norm(a.vector.view()) > NORM_FLOOR {
                prop_assert!((relevance(&a, &a) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn hinge_is_bounded(i_rel in -1.0f64..1.0, negs in proptest::collection::vec(-1.0f64..1.0, 1..6)) {
            let l = loss_pairwise(i_rel, &negs, 1.0).unwrap();
            prop_assert!((0.0..=3.0).contains(&l));
        }

        // With M = K = 2 and independent columns, the reconstruction's
        // coordinates in the column basis are exactly the attention weights.
        #[test]
        fn reconstruction_in_convex_hull(
            c in vec_strategy(4).prop_filter("independent", |v| (v[0] * v[3] - v[1] * v[2]).abs() > 0.1),
            d in vec_strategy(2),
        ) {
            let c = Array2::from_shape_vec((2, 2), c).unwrap();
            let attn = attention(c.view(), &emb(Array1::from(d)));
            let r = reconstruct(c.view(), &attn).vector;
            let det = c[[0, 0]] * c[[1, 1]] - c[[0, 1]] * c[[1, 0]];
            let w0 = (r[0] * c[[1, 1]] - r[1] * c[[0, 1]]) / det;
            let w1 = (c[[0, 0]] * r[1] - c[[1, 0]] * r[0]) / det;
            prop_assert!(w0 >= -1e-9 && w1 >= -1e-9);
            prop_assert!((w0 + w1 - 1.0).abs() < 1e-9);
        }
    }
}
