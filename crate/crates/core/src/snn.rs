//! Shared-nearest-neighbor similarity, per-space distance matrices and the
//! compression/stretch dissimilarity matrices built from them.
//!
//! For neighbor lists `p_1..p_k` and `q_1..q_k` (rank 1 is the nearest
//! neighbor) the SNN similarity is
//!
//! ```text
//! sim(p, q) = Σ_{p_m = q_n} (k + 1 - m) · (k + 1 - n)
//! ```
//!
//! Similarities are divided by the largest one in the table (a point's
//! similarity with itself) and turned into distances with the reciprocal
//! transform `1 / (sim + alpha)`. The resulting matrix is then divided by
//! its maximum so that both spaces share the `[0, 1]` scale.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::knn::{build_knn, pairwise_euclidean, KnnLists};
use crate::matrix::Matrix;
use crate::model::{DistanceChoice, MetricConfig};
use crate::par;

/// Largest `k` whose raw similarities still fit the `u32` table.
pub const MAX_K_SNN: usize = 2000;

/// SNN similarity of two neighbor lists of equal length `k`.
pub fn snn_similarity(knn_a: &[u32], knn_b: &[u32], k: usize) -> f64 {
    debug_assert!(knn_a.len() == k && knn_b.len() == k);
    let mut sim = 0u64;
    for (m, a) in knn_a.iter().enumerate() {
        if let Some(n) = knn_b.iter().position(|b| b == a) {
            sim += ((k - m) * (k - n)) as u64;
        }
    }
    sim as f64
}

/// Reciprocal transform of a normalized similarity.
#[inline]
pub fn point_distance(sim_normalized: f64, alpha: f64) -> f64 {
    1.0 / (sim_normalized + alpha)
}

/// Everything the metrics need to know about one space.
#[derive(Debug, Clone)]
pub struct SpaceIndex {
    k: usize,
    alpha: f64,
    distance: DistanceChoice,
    knn: KnnLists,
    /// Raw (integer-valued) SNN similarities, row-major `N×N`.
    snn_raw: Vec<u32>,
    max_sim: f64,
    dist: Matrix,
    dist_max: f64,
}

impl SpaceIndex {
    #[inline]
    pub fn n_points(&self) -> usize {
        self.dist.rows()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn distance_choice(&self) -> DistanceChoice {
        self.distance
    }

    pub fn knn(&self) -> &KnnLists {
        &self.knn
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        self.knn.neighbors(i)
    }

    /// Unnormalized SNN similarity.
    #[inline]
    pub fn raw_similarity(&self, i: usize, j: usize) -> u32 {
        self.snn_raw[i * self.n_points() + j]
    }

    /// SNN similarity divided by `max_sim`, in `[0, 1]`.
    #[inline]
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        f64::from(self.raw_similarity(i, j)) / self.max_sim
    }

    /// Largest raw similarity in the table.
    #[inline]
    pub fn max_sim(&self) -> f64 {
        self.max_sim
    }

    /// Normalized distance matrix (`H` or `L`).
    pub fn dist_matrix(&self) -> &Matrix {
        &self.dist
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    /// The maximum the raw distance matrix was divided by.
    #[inline]
    pub fn dist_max(&self) -> f64 {
        self.dist_max
    }
}

#[cfg(test)]
impl SpaceIndex {
    /// Hand-built index for unit tests; `snn_raw` is row-major `N×N`.
    pub(crate) fn from_parts(
        knn: KnnLists,
        snn_raw: Vec<u32>,
        max_sim: f64,
        alpha: f64,
        distance: DistanceChoice,
        dist: Matrix,
        dist_max: f64,
    ) -> Self {
        Self { k: knn.k(), alpha, distance, knn, snn_raw, max_sim, dist, dist_max }
    }
}

fn snn_table(knn: &KnnLists) -> Vec<u32> {
    let n = knn.n_points();
    let k = knn.k();
    // rev[u] lists (q, rank of u in q's list), ranks 1-based.
    let mut rev: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for q in 0..n {
        for (r, &u) in knn.neighbors(q).iter().enumerate() {
            rev[u as usize].push((q as u32, (r + 1) as u32));
        }
    }
    let rows = par::map_range(n, |p| {
        let mut row = vec![0u32; n];
        for (m, &u) in knn.neighbors(p).iter().enumerate() {
            let wm = (k - m) as u32;
            for &(q, rank) in &rev[u as usize] {
                row[q as usize] += wm * (k as u32 + 1 - rank);
            }
        }
        row
    });
    rows.concat()
}

/// Builds kNN lists, SNN similarities and the normalized distance matrix of
/// one space.
pub fn build_space_index(coords: &Matrix, config: &MetricConfig) -> Result<SpaceIndex> {
    let n = coords.rows();
    config.validate(n)?;
    if config.k_snn > MAX_K_SNN {
        return Err(Error::KOutOfRange { k: config.k_snn, n, requirement: "k <= 2000" });
    }
    let knn = build_knn(coords, config.k_snn)?;
    let snn_raw = snn_table(&knn);
    let max_sim = f64::from(snn_raw.iter().copied().max().unwrap_or(0));

    let mut dist = match config.distance {
        DistanceChoice::Snn => {
            let data: Vec<f64> = snn_raw
                .iter()
                .map(|&s| point_distance(f64::from(s) / max_sim, config.alpha))
                .collect();
            Matrix::from_vec(n, n, data)?
        }
        DistanceChoice::Euclidean => pairwise_euclidean(coords),
    };
    let dist_max = dist.max_entry(false);
    if dist_max > 0.0 {
        for i in 0..n {
            for v in dist.row_mut(i) {
                *v /= dist_max;
            }
        }
    }
    Ok(SpaceIndex {
        k: config.k_snn,
        alpha: config.alpha,
        distance: config.distance,
        knn,
        snn_raw,
        max_sim,
        dist,
        dist_max,
    })
}

/// Signed dissimilarity `H - L` with the extrema of its positive part `D⁺`
/// (compression) and negative part `D⁻` (stretching).
#[derive(Debug, Clone)]
pub struct DistortionMatrices {
    diff: Matrix,
    pub min_plus: f64,
    pub max_plus: f64,
    pub min_minus: f64,
    pub max_minus: f64,
}

impl DistortionMatrices {
    #[inline]
    pub fn n_points(&self) -> usize {
        self.diff.rows()
    }

    /// `H - L` at `(i, j)`.
    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.diff.get(i, j)
    }

    #[inline]
    pub fn d_plus(&self, i: usize, j: usize) -> f64 {
        self.raw(i, j).max(0.0)
    }

    #[inline]
    pub fn d_minus(&self, i: usize, j: usize) -> f64 {
        (-self.raw(i, j)).max(0.0)
    }

    pub fn d_plus_matrix(&self) -> Matrix {
        self.map(|v| v.max(0.0))
    }

    pub fn d_minus_matrix(&self) -> Matrix {
        self.map(|v| (-v).max(0.0))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let data = self.diff.as_slice().iter().map(|&v| f(v)).collect();
        Matrix::from_vec(self.diff.rows(), self.diff.cols(), data).expect("same shape")
    }
}

/// Subtracts `L` from `H` and records the extrema of both signed parts over
/// all off-diagonal pairs (undistorted pairs included, so minima are usually
/// zero).
pub fn build_distortion_matrices(high: &SpaceIndex, low: &SpaceIndex) -> Result<DistortionMatrices> {
    let n = high.n_points();
    if low.n_points() != n {
        return Err(Error::SizeMismatch(n, low.n_points()));
    }
    distortion_from_matrices(high.dist_matrix(), low.dist_matrix())
}

/// Builds a [`DistortionMatrices`] straight from two distance matrices.
pub fn distortion_from_matrices(high: &Matrix, low: &Matrix) -> Result<DistortionMatrices> {
    let n = high.rows();
    if low.rows() != n || high.cols() != n || low.cols() != n {
        return Err(Error::SizeMismatch(n, low.rows()));
    }
    let mut diff = Matrix::zeros(n, n);
    let (mut min_plus, mut max_plus) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_minus, mut max_minus) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            let d = high.get(i, j) - low.get(i, j);
            diff.set(i, j, d);
            if i != j {
                min_plus = min_plus.min(d.max(0.0));
                max_plus = max_plus.max(d.max(0.0));
                min_minus = min_minus.min((-d).max(0.0));
                max_minus = max_minus.max((-d).max(0.0));
            }
        }
    }
    Ok(DistortionMatrices { diff, min_plus, max_plus, min_minus, max_minus })
}
