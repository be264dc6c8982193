use ndarray::Array2;

use crate::corpus::Corpus;

/// Row-normalized TF-IDF matrix (documents x vocabulary).
///
/// `tf` is the raw count, `idf = ln(N / df)`. All-zero rows stay zero.
pub fn tfidf_matrix(corpus: &Corpus) -> Array2<f64> {
    let n = corpus.len();
    let v = corpus.vocabulary.len();
    let mut counts = Array2::<f64>::zeros((n, v));
    let mut df = vec![0usize; v];
    for (row, doc) in corpus.documents.iter().enumerate() {
        for &t in &doc.token_ids {
            if counts[[row, t]] == 0.0 {
                df[t] += 1;
            }
            counts[[row, t]] += 1.0;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| {
            if d == 0 {
                0.0
            } else {
                (n as f64 / d as f64).ln()
            }
        })
        .collect();
    for mut row in counts.rows_mut() {
        for (x, w) in row.iter_mut().zip(&idf) {
            *x *= w;
        }
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess, PreprocessOptions, RawDocument};

    fn corpus(lines: &[&str]) -> Corpus {
        preprocess(
            &RawDocument::from_lines(lines.iter().copied()),
            &PreprocessOptions::raw(),
        )
        .unwrap()
    }

    /// Straight double loop over documents and terms.
    #[allow(clippy::needless_range_loop)]
    fn naive(corpus: &Corpus) -> Vec<Vec<f64>> {
        let n = corpus.len();
        let v = corpus.vocabulary.len();
        let mut out = vec![vec![0.0; v]; n];
        for t in 0..v {
            let df = corpus
                .documents
                .iter()
                .filter(|d| d.token_ids.contains(&t))
                .count();
            for (i, doc) in corpus.documents.iter().enumerate() {
                let tf = doc.token_ids.iter().filter(|&&x| x == t).count() as f64;
                if df > 0 {
                    out[i][t] = tf * (n as f64 / df as f64).ln();
                }
            }
        }
        for row in &mut out {
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    #[test]
    fn matches_naive_oracle() {
        let c = corpus(&[
            "apple banana apple cherry",
            "banana banana date",
            "cherry date elder fig",
            "apple fig fig fig",
            "grape",
        ]);
        let fast = tfidf_matrix(&c);
        let slow = naive(&c);
        for (i, row) in slow.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert!((fast[[i, j]] - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ubiquitous_term_has_zero_weight() {
        let c = corpus(&["common a", "common b", "common c"]);
        let m = tfidf_matrix(&c);
        let common = c.vocabulary.index_of("common").unwrap();
        assert!(m.column(common).iter().all(|&x| x == 0.0));
    }
}
