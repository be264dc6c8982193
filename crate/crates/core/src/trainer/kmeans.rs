//! Lloyd's k-means with k-means++ seeding.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tolerance: f64,
    /// Independent seedings; the run with the lowest WCSS is kept.
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iter: 100,
            tolerance: 1e-6,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    /// One centroid per row (k x dim).
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares for the final assignment.
    pub wcss: f64,
    /// WCSS after each assignment step of the kept run.
    pub wcss_history: Vec<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distinct_rows(points: ArrayView2<f64>) -> usize {
    points
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

/// Single seeded run with default options.
pub fn kmeans(points: ArrayView2<f64>, k: usize, seed: u64) -> Result<KMeans> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kmeans_with(points, k, &KMeansOptions::default(), &mut rng)
}

pub fn kmeans_with<R: Rng + ?Sized>(
    points: ArrayView2<f64>,
    k: usize,
    options: &KMeansOptions,
    rng: &mut R,
) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::Config("k-means needs k >= 1".into()));
    }
    let distinct = distinct_rows(points);
    if k > distinct {
        return Err(Error::TooFewPoints {
            needed: k,
            found: distinct,
        });
    }
    if !points.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let mut best: Option<KMeans> = None;
    for _ in 0..options.restarts.max(1) {
        let run = lloyd(points, seed_plus_plus(points, k, rng)?, options);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_plus_plus<R: Rng + ?Sized>(
    points: ArrayView2<f64>,
    k: usize,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let n = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut nearest: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, points.row(first)))
        .collect();
    for c in 1..k {
        let overflow = || Error::NonFinite("k-means++ seeding distances".into());
        if !nearest.iter().all(|d| d.is_finite()) {
            return Err(overflow());
        }
        // distinct >= k guarantees some point is still at positive distance
        let pick = WeightedIndex::new(&nearest)
            .map_err(|_| overflow())?
            .sample(rng);
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(p, points.row(pick)));
        }
    }
    Ok(centroids)
}

fn assign(points: ArrayView2<f64>, centroids: &Array2<f64>, labels: &mut [usize]) -> f64 {
    let mut wcss = 0.0;
    for (i, p) in points.rows().into_iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, centroid) in centroids.rows().into_iter().enumerate() {
            let d = sq_dist(p, centroid);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        wcss += best_d;
    }
    wcss
}

fn lloyd(points: ArrayView2<f64>, mut centroids: Array2<f64>, options: &KMeansOptions) -> KMeans {
    let (n, dim) = points.dim();
    let k = centroids.nrows();
    let mut labels = vec![0; n];
    let mut history = Vec::new();

    for _ in 0..options.max_iter {
        history.push(assign(points, &centroids, &mut labels));

        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for (i, p) in points.rows().into_iter().enumerate() {
            sums.row_mut(labels[i]).scaled_add(1.0, &p);
            counts[labels[i]] += 1;
        }
        let mut updated = centroids.clone();
        for ((mut row, sum), &count) in updated.rows_mut().into_iter().zip(sums.rows()).zip(&counts)
        {
            if count > 0 {
                row.assign(&(&sum / count as f64));
            }
        }
        for c in (0..k).filter(|&c| counts[c] == 0) {
            // re-seed at the point farthest from its own centroid
            let far = (0..n)
                .max_by(|&a, &b| {
                    let da = sq_dist(points.row(a), updated.row(labels[a]));
                    let db = sq_dist(points.row(b), updated.row(labels[b]));
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("non-empty point set");
            updated.row_mut(c).assign(&points.row(far));
            labels[far] = c;
        }
        let shift = centroids
            .rows()
            .into_iter()
            .zip(updated.rows())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        if shift < options.tolerance {
            break;
        }
    }
    let wcss = assign(points, &centroids, &mut labels);
    history.push(wcss);
    KMeans {
        centroids,
        assignments: labels,
        wcss,
        wcss_history: history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand_distr::StandardNormal;

    #[test]
    fn separated_pairs() {
        let pts = array![[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let km = kmeans(pts.view(), 2, 7).unwrap();
        let mut cents: Vec<(f64, f64)> = km
            .centroids
            .rows()
            .into_iter()
            .map(|r| (r[0], r[1]))
            .collect();
        cents.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(cents, vec![(0.0, 0.5), (10.0, 0.5)]);
        assert_eq!(km.assignments[0], km.assignments[1]);
        assert_ne!(km.assignments[0], km.assignments[2]);
    }

    #[test]
    fn k_equal_to_distinct_points() {
        let pts = array![[0.0, 0.0], [1.0, 2.0], [3.0, -1.0], [1.0, 2.0]];
        let km = kmeans(pts.view(), 3, 1).unwrap();
        assert_eq!(km.wcss, 0.0);
        for c in km.centroids.rows() {
            assert!(pts.rows().into_iter().any(|p| p == c));
        }
    }

    #[test]
    fn errors() {
        let pts = array![[0.0], [0.0], [1.0]];
        assert!(matches!(kmeans(pts.view(), 0, 1), Err(Error::Config(_))));
        assert!(matches!(
            kmeans(pts.view(), 3, 1),
            Err(Error::TooFewPoints {
                needed: 3,
                found: 2
            })
        ));
        let huge = array![[1e300], [-1e300], [0.0]];
        let err = kmeans(huge.view(), 3, 1).unwrap_err();
        assert!(err.is_numeric());
        let nan = array![[f64::NAN], [0.0]];
        assert!(kmeans(nan.view(), 1, 1).unwrap_err().is_numeric());
    }

    #[test]
    fn wcss_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let centers = [(0.0, 0.0), (4.0, 1.0), (1.0, 5.0)];
        let mut pts = Array2::zeros((150, 2));
        for (i, mut row) in pts.rows_mut().into_iter().enumerate() {
            let (cx, cy) = centers[i % 3];
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            row[0] = cx + 1.5 * dx;
            row[1] = cy + 1.5 * dy;
        }
        for seed in 0..10 {
            let km = kmeans(pts.view(), 3, seed).unwrap();
            for w in km.wcss_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", km.wcss_history);
            }
        }
    }

    #[test]
    fn restarts_never_worse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = Array2::from_shape_fn((60, 3), |_| rng.sample::<f64, _>(StandardNormal));
        let single = kmeans_with(
            pts.view(),
            4,
            &KMeansOptions::default(),
            &mut ChaCha8Rng::seed_from_u64(2),
        )
        .unwrap();
        let multi = kmeans_with(
            pts.view(),
            4,
            &KMeansOptions {
                restarts: 10,
                ..Default::default()
            },
            &mut ChaCha8Rng::seed_from_u64(2),
        )
        .unwrap();
        assert!(multi.wcss <= single.wcss);
    }
}
