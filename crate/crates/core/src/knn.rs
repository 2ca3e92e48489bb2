//! Exact k-nearest-neighbor lists under Euclidean distance.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math::squared_euclidean;
use crate::matrix::Matrix;
use crate::par;

/// Neighbor lists of every point, `k` entries each, nearest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnLists {
    k: usize,
    ids: Vec<u32>,
}

impl KnnLists {
    /// Wraps a flat row-major list of `n·k` neighbor ids.
    pub fn from_flat(k: usize, ids: Vec<u32>) -> Result<Self> {
        if k == 0 || !ids.len().is_multiple_of(k) {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} ids do not form rows of {k}",
                ids.len()
            )));
        }
        Ok(Self { k, ids })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.ids.len().checked_div(self.k).unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }
}

#[inline]
fn by_distance_then_id(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Exact kNN by exhaustive search. Ties in distance go to the lower id.
pub fn build_knn(coords: &Matrix, k: usize) -> Result<KnnLists> {
    let n = coords.rows();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n, requirement: "1 <= k < N" });
    }
    let rows = par::map_range(n, |i| {
        let p = coords.row(i);
        let mut cand: Vec<(f64, u32)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (squared_euclidean(p, coords.row(j)), j as u32))
            .collect();
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, by_distance_then_id);
            cand.truncate(k);
        }
        cand.sort_unstable_by(by_distance_then_id);
        cand.into_iter().map(|(_, j)| j).collect::<Vec<u32>>()
    });
    Ok(KnnLists { k, ids: rows.concat() })
}

/// Full Euclidean distance matrix.
pub fn pairwise_euclidean(coords: &Matrix) -> Matrix {
    let n = coords.rows();
    let rows = par::map_range(n, |i| {
        let p = coords.row(i);
        (0..n)
            .map(|j| crate::math::sqrt(squared_euclidean(p, coords.row(j))))
            .collect::<Vec<f64>>()
    });
    Matrix::from_vec(n, n, rows.concat()).expect("square buffer")
}
