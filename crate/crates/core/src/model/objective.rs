//! Batch objectives, their analytic gradients and adversarial perturbations.
//!
//! For every document `i` in a batch the forward pass computes
//!
//! ```text
//! d_i  = mean of word columns
//! p_i  = softmax(C_eff^T d_i)
//! r_i  = C_eff p_i
//! L1   = mean_j max(0, gamma - cos(d_i, r_i) + cos(d_i, d_j))
//! L2   = -cos(d_i, r_i)
//! ```
//!
//! and the batch objective is the sum of the enabled losses. The combined
//! target is `J = J1(E, C) + alpha * J2(E, C + delta)`, where `J2` is the same
//! computation with a perturbed cluster matrix. Gradients are accumulated by
//! hand in reverse order through the steps above.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use super::{cosine, l2_norm, softmax, ModelParams, Perturbation, NORM_FLOOR};
use crate::corpus::EncodedDocument;
use crate::{Error, Result};

/// Which reconstruction losses contribute to the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossSwitches {
    /// Margin ranking loss against negatives.
    pub pairwise: bool,
    /// Negated relevance of the reconstruction.
    pub pointwise: bool,
}

impl Default for LossSwitches {
    fn default() -> Self {
        LossSwitches {
            pairwise: true,
            pointwise: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub losses: LossSwitches,
    pub train_words: bool,
    pub train_clusters: bool,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            gamma: 1.0,
            alpha: 1.0,
            epsilon: 50.0,
            losses: LossSwitches::default(),
            train_words: true,
            train_clusters: true,
        }
    }
}

/// Gradient carriers. `words` is dense but only batch-token columns are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub words: Array2<f64>,
    pub clusters: Array2<f64>,
}

impl Gradients {
    pub fn zeros(dim: usize, vocab: usize, clusters: usize) -> Self {
        Gradients {
            words: Array2::zeros((dim, vocab)),
            clusters: Array2::zeros((dim, clusters)),
        }
    }

    fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        self.words.scaled_add(scale, &other.words);
        self.clusters.scaled_add(scale, &other.clusters);
    }

    fn apply_switches(&mut self, cfg: &ObjectiveConfig) {
        if !cfg.train_words {
            self.words.fill(0.0);
        }
        if !cfg.train_clusters {
            self.clusters.fill(0.0);
        }
    }
}

/// Sparse additive perturbation of word-embedding columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordPerturbation {
    pub columns: BTreeMap<usize, Array1<f64>>,
    pub epsilon: f64,
}

/// Objective value and gradients with respect to the effective
/// (possibly perturbed) word and cluster matrices.
#[derive(Debug, Clone)]
pub struct BatchEvaluation {
    pub value: f64,
    pub gradients: Gradients,
}

fn check_negatives(
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    losses: LossSwitches,
) -> Result<()> {
    if !losses.pairwise && !losses.pointwise {
        return Err(Error::Config("at least one loss must be enabled".into()));
    }
    if negatives.len() != batch.len() {
        return Err(Error::LengthMismatch {
            left: batch.len(),
            right: negatives.len(),
        });
    }
    for (doc, negs) in batch.iter().zip(negatives) {
        if losses.pairwise && negs.is_empty() {
            return Err(Error::Config(format!(
                "document {} has no negatives for the pairwise loss",
                doc.id
            )));
        }
        if let Some(&bad) = negs.iter().find(|&&j| j >= batch.len()) {
            return Err(Error::Config(format!(
                "negative position {bad} outside batch of {}",
                batch.len()
            )));
        }
    }
    Ok(())
}

fn embed_all(
    words: ArrayView2<f64>,
    word_delta: Option<&WordPerturbation>,
    batch: &[EncodedDocument],
) -> Vec<Array1<f64>> {
    batch
        .iter()
        .map(|doc| {
            let mut d = super::doc_embed(words, doc).vector;
            if let Some(delta) = word_delta {
                let inv = 1.0 / doc.len() as f64;
                for t in &doc.token_ids {
                    if let Some(col) = delta.columns.get(t) {
                        d.scaled_add(inv, col);
                    }
                }
            }
            d
        })
        .collect()
}

/// Adds `scale * d cos(a, b) / d a` into `out`.
fn cosine_grad_into(
    out: &mut Array1<f64>,
    a: ArrayView1<f64>,
    b: ArrayView1<f64>,
    cos: f64,
    scale: f64,
) {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na < NORM_FLOOR || nb < NORM_FLOOR || scale == 0.0 {
        return;
    }
    out.scaled_add(scale / (na * nb), &b);
    out.scaled_add(-scale * cos / (na * na), &a);
}

/// Forward and backward pass over one batch.
///
/// `negatives[p]` lists batch positions used as negatives for position `p`.
/// Gradients are with respect to the effective matrices and ignore the
/// train switches.
pub fn evaluate(
    params: &ModelParams,
    word_delta: Option<&WordPerturbation>,
    cluster_delta: Option<&Array2<f64>>,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
    with_gradients: bool,
) -> Result<BatchEvaluation> {
    check_negatives(batch, negatives, cfg.losses)?;
    let clusters_owned;
    let clusters = match cluster_delta {
        Some(delta) => {
            clusters_owned = &params.clusters + delta;
            clusters_owned.view()
        }
        None => params.clusters.view(),
    };
    let (dim, vocab, m) = (params.dim(), params.vocab_size(), params.num_clusters());
    let docs = embed_all(params.words.view(), word_delta, batch);

    let mut value = 0.0;
    let mut grads = Gradients::zeros(
        if with_gradients { dim } else { 0 },
        if with_gradients { vocab } else { 0 },
        if with_gradients { m } else { 0 },
    );
    let mut doc_grads: Vec<Array1<f64>> = if with_gradients {
        vec![Array1::zeros(dim); batch.len()]
    } else {
        Vec::new()
    };

    for (p, d) in docs.iter().enumerate() {
        let logits = clusters.t().dot(d);
        let probs = softmax(logits.view());
        let recon = clusters.dot(&probs);
        let rel = cosine(d.view(), recon.view());

        // d loss / d rel, and d loss / d cos(d_i, d_j) per negative
        let mut g_rel = 0.0;
        let mut neg_terms: Vec<(usize, f64, f64)> = Vec::new();
        if cfg.losses.pairwise {
            let negs = &negatives[p];
            let n = negs.len() as f64;
            let mut hinge = 0.0;
            for &j in negs {
                let neg_rel = cosine(d.view(), docs[j].view());
                let margin = cfg.gamma - rel + neg_rel;
                if margin > 0.0 {
                    hinge += margin;
                    g_rel -= 1.0 / n;
                    neg_terms.push((j, neg_rel, 1.0 / n));
                }
            }
            value += hinge / n;
        }
        if cfg.losses.pointwise {
            value -= rel;
            g_rel -= 1.0;
        }

        if !with_gradients {
            continue;
        }

        let mut g_d = std::mem::replace(&mut doc_grads[p], Array1::zeros(0));
        cosine_grad_into(&mut g_d, d.view(), recon.view(), rel, g_rel);
        for &(j, neg_rel, g) in &neg_terms {
            cosine_grad_into(&mut g_d, d.view(), docs[j].view(), neg_rel, g);
            if j == p {
                cosine_grad_into(&mut g_d, docs[j].view(), d.view(), neg_rel, g);
            } else {
                cosine_grad_into(&mut doc_grads[j], docs[j].view(), d.view(), neg_rel, g);
            }
        }

        let mut g_recon = Array1::zeros(dim);
        cosine_grad_into(&mut g_recon, recon.view(), d.view(), rel, g_rel);

        // recon = C p
        let g_probs = clusters.t().dot(&g_recon);
        // softmax backward
        let inner = probs.dot(&g_probs);
        let g_logits = Zip::from(&probs)
            .and(&g_probs)
            .map_collect(|&pr, &gp| pr * (gp - inner));
        // logits = C^T d
        for (mi, mut col) in grads.clusters.columns_mut().into_iter().enumerate() {
            col.scaled_add(probs[mi], &g_recon);
            col.scaled_add(g_logits[mi], d);
        }
        g_d += &clusters.dot(&g_logits);
        doc_grads[p] = g_d;
    }

    if with_gradients {
        for (doc, g_d) in batch.iter().zip(&doc_grads) {
            if !g_d.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteGradient { doc_id: doc.id });
            }
            let inv = 1.0 / doc.len() as f64;
            for &t in &doc.token_ids {
                grads.words.column_mut(t).scaled_add(inv, g_d);
            }
        }
        if !grads.clusters.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteGradient {
                doc_id: batch.first().map_or(0, |d| d.id),
            });
        }
    }

    Ok(BatchEvaluation {
        value,
        gradients: grads,
    })
}

/// `J1(E, C)`: summed enabled losses over the batch with the clean clusters.
pub fn objective_j1(
    params: &ModelParams,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    Ok(evaluate(params, None, None, batch, negatives, cfg, false)?.value)
}

/// `J2(E, C + delta)`. Negative embeddings depend only on `E` and are unchanged.
pub fn objective_j2(
    params: &ModelParams,
    pert: &Perturbation,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    Ok(evaluate(
        params,
        None,
        Some(&pert.delta),
        batch,
        negatives,
        cfg,
        false,
    )?
    .value)
}

/// `J = J1 + alpha * J2`.
pub fn objective_total(
    params: &ModelParams,
    pert: &Perturbation,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    let j1 = objective_j1(params, batch, negatives, cfg)?;
    if cfg.alpha == 0.0 {
        return Ok(j1);
    }
    let j2 = objective_j2(params, pert, batch, negatives, cfg)?;
    Ok(j1 + cfg.alpha * j2)
}

/// Combines a clean pass and an adversarial pass into `J` and its gradients.
pub(crate) fn combine(
    clean: BatchEvaluation,
    adversarial: Option<BatchEvaluation>,
    cfg: &ObjectiveConfig,
) -> BatchEvaluation {
    let mut out = clean;
    if let Some(adv) = adversarial {
        out.value += cfg.alpha * adv.value;
        out.gradients.add_scaled(&adv.gradients, cfg.alpha);
    }
    out.gradients.apply_switches(cfg);
    out
}

/// Gradients of `J1 + alpha * J2(E, C + pert)` with `pert` held fixed.
pub fn gradients(
    params: &ModelParams,
    pert: &Perturbation,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<Gradients> {
    let clean = evaluate(params, None, None, batch, negatives, cfg, true)?;
    let adv = if cfg.alpha != 0.0 {
        Some(evaluate(
            params,
            None,
            Some(&pert.delta),
            batch,
            negatives,
            cfg,
            true,
        )?)
    } else {
        None
    };
    Ok(combine(clean, adv, cfg).gradients)
}

/// Scales `grad` to norm `epsilon`, or zeroes it when the norm is negligible.
fn normalize_into(grad: ArrayView1<f64>, epsilon: f64) -> Array1<f64> {
    let norm = l2_norm(grad);
    if norm < NORM_FLOOR {
        Array1::zeros(grad.len())
    } else {
        grad.mapv(|v| epsilon * v / norm)
    }
}

/// Column-wise fast-gradient perturbation from `d J2 / d C` at zero perturbation.
pub(crate) fn cluster_perturbation_from(
    grad_clusters: &Array2<f64>,
    cfg: &ObjectiveConfig,
) -> Perturbation {
    let mut delta = Array2::zeros(grad_clusters.raw_dim());
    for (mut out, g) in delta.columns_mut().into_iter().zip(grad_clusters.columns()) {
        let g = g.mapv(|v| cfg.alpha * v);
        out.assign(&normalize_into(g.view(), cfg.epsilon));
    }
    Perturbation {
        delta,
        epsilon: cfg.epsilon,
    }
}

pub(crate) fn word_perturbation_from(
    grad_words: &Array2<f64>,
    batch: &[EncodedDocument],
    cfg: &ObjectiveConfig,
) -> WordPerturbation {
    let mut columns = BTreeMap::new();
    for doc in batch {
        for &t in &doc.token_ids {
            columns.entry(t).or_insert_with(|| {
                let g = grad_words.column(t).mapv(|v| cfg.alpha * v);
                normalize_into(g.view(), cfg.epsilon)
            });
        }
    }
    WordPerturbation {
        columns,
        epsilon: cfg.epsilon,
    }
}

/// Linearized worst-case perturbation of the cluster embeddings:
/// `delta_m = epsilon * g_m / |g_m|` with `g_m = alpha * dJ2/dC_m` at `delta = 0`.
pub fn adversarial_step(
    params: &ModelParams,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<Perturbation> {
    let eval = evaluate(params, None, None, batch, negatives, cfg, true)?;
    Ok(cluster_perturbation_from(&eval.gradients.clusters, cfg))
}

/// The same rule applied to the word columns that occur in the batch.
pub fn word_adversarial_step(
    params: &ModelParams,
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    cfg: &ObjectiveConfig,
) -> Result<WordPerturbation> {
    let eval = evaluate(params, None, None, batch, negatives, cfg, true)?;
    Ok(word_perturbation_from(&eval.gradients.words, batch, cfg))
}
