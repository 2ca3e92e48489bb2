//! Lloyd's K-Means with k-means++ seeding, and X-Means (K-Means whose
//! cluster count grows by BIC-approved two-way splits).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{ln, squared_euclidean};
use crate::matrix::Matrix;

const MAX_LLOYD_ITERATIONS: usize = 100;

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_euclidean(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp<R: Rng + ?Sized>(points: &Matrix, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.rows();
    let mut centers = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = points.iter_rows().map(|p| squared_euclidean(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (d, p) in d2.iter_mut().zip(points.iter_rows()) {
            *d = d.min(squared_euclidean(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Lloyd iterations from the given centers. Returns labels and final centers;
/// a center that loses all its points keeps its position.
pub fn lloyd(points: &Matrix, mut centers: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = points.rows();
    let dim = points.cols();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter_rows().enumerate() {
            let (c, _) = nearest(p, &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (p, &l) in points.iter_rows().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            if count > 0 {
                *center = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    (labels, centers)
}

/// Relabels so that labels are dense and ordered by first appearance.
fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}

/// K-Means with `k` clusters (capped at the number of points).
pub fn kmeans<R: Rng + ?Sized>(points: &Matrix, k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.rows();
    let k = k.clamp(1, n.max(1));
    if n <= 1 || k == 1 {
        return vec![0; n];
    }
    let centers = kmeans_pp(points, k, rng);
    compact(&lloyd(points, centers).0)
}

/// Bayesian information criterion of a spherical Gaussian mixture with one
/// shared per-dimension variance. `None` when the variance is undefined.
fn bic(points: &Matrix, ids: &[usize], labels: &[usize], centers: &[Vec<f64>]) -> Option<f64> {
    let r = ids.len() as f64;
    let k = centers.len() as f64;
    let dim = points.cols() as f64;
    if r <= k {
        return None;
    }
    let mut sse = 0.0;
    let mut counts = vec![0usize; centers.len()];
    for (&i, &l) in ids.iter().zip(labels) {
        sse += squared_euclidean(points.row(i), &centers[l]);
        counts[l] += 1;
    }
    let variance = (sse / (dim * (r - k))).max(1e-300);
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut log_likelihood = -r * dim / 2.0 * ln(two_pi * variance) - dim * (r - k) / 2.0;
    for &rn in counts.iter().filter(|&&c| c > 0) {
        let rn = rn as f64;
        log_likelihood += rn * ln(rn / r);
    }
    let n_params = (k - 1.0) + dim * k + 1.0;
    Some(log_likelihood - n_params / 2.0 * ln(r))
}

/// X-Means: start from `k_min` clusters and split any cluster whose two-way
/// K-Means split improves its local BIC, refitting globally after each round,
/// until no split helps or `k_max` is reached.
pub fn xmeans<R: Rng + ?Sized>(points: &Matrix, k_min: usize, k_max: usize, rng: &mut R) -> Vec<usize> {
    let n = points.rows();
    if n <= 2 {
        return (0..n).collect();
    }
    let k_max = k_max.min(n);
    let k_min = k_min.clamp(1, k_max);
    let (mut labels, mut centers) = lloyd(points, kmeans_pp(points, k_min, rng));
    while centers.len() < k_max {
        // (BIC gain, parent cluster, child centers)
        let mut candidates: Vec<(f64, usize, Vec<Vec<f64>>)> = Vec::new();
        for c in 0..centers.len() {
            let ids: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if ids.len() < 3 {
                continue;
            }
            let local = points.select_rows(&ids);
            let all: Vec<usize> = (0..ids.len()).collect();
            let parent_bic = bic(&local, &all, &vec![0; ids.len()], &centers[c..=c]);
            let (child_labels, child_centers) = lloyd(&local, kmeans_pp(&local, 2, rng));
            let child_bic = bic(&local, &all, &child_labels, &child_centers);
            if let (Some(p), Some(ch)) = (parent_bic, child_bic) {
                if ch > p && child_labels.contains(&1) && child_labels.contains(&0) {
                    candidates.push((ch - p, c, child_centers));
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let room = k_max - centers.len();
        let mut next: Vec<Vec<f64>> = Vec::new();
        let mut split = vec![false; centers.len()];
        for (_, c, children) in candidates.into_iter().take(room) {
            split[c] = true;
            next.extend(children);
        }
        for (c, center) in centers.iter().enumerate() {
            if !split[c] {
                next.push(center.clone());
            }
        }
        let (l, cs) = lloyd(points, next);
        labels = l;
        centers = cs;
    }
    compact(&labels)
}
