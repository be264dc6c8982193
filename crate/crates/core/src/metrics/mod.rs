//! External clustering quality: NMI, ARI and best-mapping accuracy.
//!
//! All three are computed from the contingency table between gold topics
//! (rows) and predicted clusters (columns). Logarithms are natural.

mod hungarian;

use serde::{Deserialize, Serialize};

use crate::corpus::remap_dense;
use crate::{Error, Result};

pub use hungarian::{assignment_cost, hungarian};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[i][j]`: documents in gold topic `i` and predicted cluster `j`.
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let cols = counts.first().map_or(0, Vec::len);
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols)
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let total = row_sums.iter().sum();
        ContingencyTable {
            counts,
            row_sums,
            col_sums,
            total,
        }
    }

    /// True when both labelings induce the same partition.
    pub fn is_permutation(&self) -> bool {
        let nonzero_per_row = self
            .counts
            .iter()
            .all(|r| r.iter().filter(|&&c| c > 0).count() == 1);
        let nonzero_per_col =
            (0..self.col_sums.len()).all(|j| self.counts.iter().filter(|r| r[j] > 0).count() == 1);
        nonzero_per_row && nonzero_per_col
    }
}

/// Co-occurrence counts. Labels of any integer type are densified first.
pub fn contingency<T, P>(truth: &[T], pred: &[P]) -> Result<ContingencyTable>
where
    T: Copy + Eq + std::hash::Hash,
    P: Copy + Eq + std::hash::Hash,
{
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Config("cannot score an empty labeling".into()));
    }
    let t = remap_dense(truth);
    let p = remap_dense(pred);
    let rows = t.iter().max().map_or(0, |m| m + 1);
    let cols = p.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0u64; cols]; rows];
    for (&i, &j) in t.iter().zip(&p) {
        counts[i][j] += 1;
    }
    Ok(ContingencyTable::from_counts(counts))
}

fn entropy_sum(marginals: &[u64], total: f64) -> f64 {
    marginals
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64 / total).ln())
        .sum()
}

/// Normalized mutual information.
///
/// When either labeling has a single cluster the ratio is undefined; the
/// result is then 1 for identical partitions and 0 otherwise.
pub fn nmi(table: &ContingencyTable) -> f64 {
    let n = table.total as f64;
    let h_true = entropy_sum(&table.row_sums, n);
    let h_pred = entropy_sum(&table.col_sums, n);
    if h_true == 0.0 || h_pred == 0.0 {
        return if table.is_permutation() { 1.0 } else { 0.0 };
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c * (n * c / (table.row_sums[i] as f64 * table.col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / (h_true * h_pred).sqrt()).clamp(0.0, 1.0)
}

fn pairs(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index. A zero denominator yields 1.
pub fn ari(table: &ContingencyTable) -> Result<f64> {
    if table.total < 2 {
        return Err(Error::Config("ARI needs at least two documents".into()));
    }
    let index: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let expected = sum_rows * sum_cols / pairs(table.total);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Best one-to-one mapping accuracy from predicted clusters to gold topics.
pub fn acc<T, P>(truth: &[T], pred: &[P]) -> Result<f64>
where
    T: Copy + Eq + std::hash::Hash,
    P: Copy + Eq + std::hash::Hash,
{
    let table = contingency(truth, pred)?;
    Ok(acc_from_table(&table))
}

pub fn acc_from_table(table: &ContingencyTable) -> f64 {
    let rows = table.row_sums.len();
    let cols = table.col_sums.len();
    let n = rows.max(cols);
    let max = table.counts.iter().flatten().copied().max().unwrap_or(0) as f64;
    // rows: predicted clusters, columns: topics; padding counts as zero matches
    let count = |p: usize, t: usize| -> f64 {
        if p < cols && t < rows {
            table.counts[t][p] as f64
        } else {
            0.0
        }
    };
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|p| (0..n).map(|t| max - count(p, t)).collect())
        .collect();
    let matched: f64 = hungarian(&cost)
        .iter()
        .enumerate()
        .map(|(p, &t)| count(p, t))
        .sum();
    matched / table.total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub nmi: f64,
    pub ari: f64,
    pub acc: f64,
}

pub fn score<T, P>(truth: &[T], pred: &[P]) -> Result<Scores>
where
    T: Copy + Eq + std::hash::Hash,
    P: Copy + Eq + std::hash::Hash,
{
    let table = contingency(truth, pred)?;
    Ok(Scores {
        nmi: nmi(&table),
        ari: ari(&table)?,
        acc: acc_from_table(&table),
    })
}
