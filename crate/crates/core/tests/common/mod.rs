//! Independent straight-line oracles shared by the integration tests.
//!
//! Nothing here calls into the library's model or metrics code; values are
//! recomputed from first principles on plain vectors.

#![allow(dead_code)]

use std::collections::HashMap;

use arladv::corpus::EncodedDocument;
use arladv::model::ModelParams;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub params: ModelParams,
    pub batch: Vec<EncodedDocument>,
    pub negatives: Vec<Vec<usize>>,
}

/// Random desk instance with entries uniform in (-1, 1), documents of
/// length 1..=6 and `neg_count` distinct in-batch negatives per document.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    dim: usize,
    clusters: usize,
    vocab: usize,
    batch: usize,
    neg_count: usize,
) -> Instance {
    let words = Array2::from_shape_fn((dim, vocab), |_| rng.random_range(-1.0..1.0));
    let cl = Array2::from_shape_fn((dim, clusters), |_| rng.random_range(-1.0..1.0));
    let docs: Vec<EncodedDocument> = (0..batch)
        .map(|i| {
            let len = rng.random_range(1..=6);
            EncodedDocument::new(i, (0..len).map(|_| rng.random_range(0..vocab)).collect())
        })
        .collect();
    let negatives = (0..batch)
        .map(|i| {
            let mut pool: Vec<usize> = (0..batch).filter(|&j| j != i).collect();
            let mut chosen = Vec::new();
            for _ in 0..neg_count.min(pool.len()) {
                chosen.push(pool.swap_remove(rng.random_range(0..pool.len())));
            }
            chosen
        })
        .collect();
    Instance {
        params: ModelParams::new(words, cl).unwrap(),
        batch: docs,
        negatives,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Columns of a matrix as plain vectors.
pub fn columns(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.columns().into_iter().map(|c| c.to_vec()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na < 1e-12 || nb < 1e-12 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

fn mean_embedding(words: &[Vec<f64>], tokens: &[usize]) -> Vec<f64> {
    let mut d = vec![0.0; words[0].len()];
    for &t in tokens {
        for (k, v) in words[t].iter().enumerate() {
            d[k] += v;
        }
    }
    d.iter().map(|v| v / tokens.len() as f64).collect()
}

pub fn oracle_attention(clusters: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = clusters.iter().map(|c| dot(c, d)).collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|e| e / z).collect()
}

/// Batch objective: sum over documents of the enabled losses.
pub fn oracle_objective(
    words: &[Vec<f64>],
    clusters: &[Vec<f64>],
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    gamma: f64,
    pairwise: bool,
    pointwise: bool,
) -> f64 {
    let ds: Vec<Vec<f64>> = batch
        .iter()
        .map(|doc| mean_embedding(words, &doc.token_ids))
        .collect();
    let mut total = 0.0;
    for (i, d) in ds.iter().enumerate() {
        let p = oracle_attention(clusters, d);
        let mut r = vec![0.0; d.len()];
        for (c, w) in clusters.iter().zip(&p) {
            for k in 0..d.len() {
                r[k] += w * c[k];
            }
        }
        let rel = cos(d, &r);
        if pairwise {
            let hinge: f64 = negatives[i]
                .iter()
                .map(|&j| (gamma - rel + cos(d, &ds[j])).max(0.0))
                .sum();
            total += hinge / negatives[i].len() as f64;
        }
        if pointwise {
            total -= rel;
        }
    }
    total
}

/// `J1 + alpha * J2` on explicit column lists.
pub fn oracle_total(
    words: &[Vec<f64>],
    clusters: &[Vec<f64>],
    delta: &[Vec<f64>],
    batch: &[EncodedDocument],
    negatives: &[Vec<usize>],
    gamma: f64,
    alpha: f64,
) -> f64 {
    let perturbed: Vec<Vec<f64>> = clusters
        .iter()
        .zip(delta)
        .map(|(c, e)| c.iter().zip(e).map(|(a, b)| a + b).collect())
        .collect();
    oracle_objective(words, clusters, batch, negatives, gamma, true, true)
        + alpha * oracle_objective(words, &perturbed, batch, negatives, gamma, true, true)
}

/// Relative error with a floor so that near-zero entries are compared absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn entropy(counts: &HashMap<i64, f64>, n: f64) -> f64 {
    -counts
        .values()
        .map(|&c| (c / n) * (c / n).ln())
        .sum::<f64>()
}

/// NMI from pair counting with geometric-mean normalization.
pub fn oracle_nmi(truth: &[i64], pred: &[i64]) -> f64 {
    let n = truth.len() as f64;
    let mut a: HashMap<i64, f64> = HashMap::new();
    let mut b: HashMap<i64, f64> = HashMap::new();
    let mut joint: HashMap<(i64, i64), f64> = HashMap::new();
    for (&t, &p) in truth.iter().zip(pred) {
        *a.entry(t).or_default() += 1.0;
        *b.entry(p).or_default() += 1.0;
        *joint.entry((t, p)).or_default() += 1.0;
    }
    let (ha, hb) = (entropy(&a, n), entropy(&b, n));
    if ha == 0.0 || hb == 0.0 {
        let same = joint.len() == a.len() && joint.len() == b.len();
        return if same { 1.0 } else { 0.0 };
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(t, p), &c)| (c / n) * ((c / n) / ((a[&t] / n) * (b[&p] / n))).ln())
        .sum();
    mi / (ha * hb).sqrt()
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// ARI by explicit pair counting over all document pairs.
pub fn oracle_ari(truth: &[i64], pred: &[i64]) -> f64 {
    let n = truth.len();
    let (mut both, mut same_t, mut same_p) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let st = truth[i] == truth[j];
            let sp = pred[i] == pred[j];
            same_t += st as u8 as f64;
            same_p += sp as u8 as f64;
            both += (st && sp) as u8 as f64;
        }
    }
    let expected = same_t * same_p / choose2(n as f64);
    let max = 0.5 * (same_t + same_p);
    if max - expected == 0.0 {
        1.0
    } else {
        (both - expected) / (max - expected)
    }
}

/// Best accuracy over every injective relabeling of the smaller label set.
pub fn brute_force_acc(truth: &[i64], pred: &[i64]) -> f64 {
    let mut t_labels: Vec<i64> = truth.to_vec();
    t_labels.sort();
    t_labels.dedup();
    let mut p_labels: Vec<i64> = pred.to_vec();
    p_labels.sort();
    p_labels.dedup();
    let n = truth.len() as f64;
    let mut best = 0usize;
    // map each predicted label to a distinct gold label or to nothing
    #[allow(clippy::too_many_arguments)]
    fn search(
        k: usize,
        p_labels: &[i64],
        t_labels: &[i64],
        used: &mut Vec<bool>,
        map: &mut HashMap<i64, i64>,
        truth: &[i64],
        pred: &[i64],
        best: &mut usize,
    ) {
        if k == p_labels.len() {
            let hits = truth
                .iter()
                .zip(pred)
                .filter(|(t, p)| map.get(p) == Some(t))
                .count();
            *best = (*best).max(hits);
            return;
        }
        search(k + 1, p_labels, t_labels, used, map, truth, pred, best);
        for (ti, &t) in t_labels.iter().enumerate() {
            if !used[ti] {
                used[ti] = true;
                map.insert(p_labels[k], t);
                search(k + 1, p_labels, t_labels, used, map, truth, pred, best);
                map.remove(&p_labels[k]);
                used[ti] = false;
            }
        }
    }
    search(
        0,
        &p_labels,
        &t_labels,
        &mut vec![false; t_labels.len()],
        &mut HashMap::new(),
        truth,
        pred,
        &mut best,
    );
    best as f64 / n
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
