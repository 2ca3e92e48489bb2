//! The two cluster-producing functions of the metric: `extract_cluster`
//! grows a random cluster around a seed point in one space, and
//! [`cluster_in_opposite_space`] reveals how that cluster disperses in the
//! other space. [`cluster_pair_distance`] compares the resulting groups.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::matrix::Matrix;
use crate::model::{ClusteringChoice, DistanceChoice, ExtractionChoice, MetricConfig};
use crate::snn::SpaceIndex;

pub mod hdbscan;
pub mod kmeans;

pub use hdbscan::{hdbscan, HdbscanParams};

/// Which space a cluster lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Space {
    Original,
    Projected,
}

/// A cluster grown from a seed point. Members are sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedCluster {
    pub member_ids: Vec<u32>,
    pub seed_id: u32,
    pub source_space: Space,
}

/// Disjoint groups covering an input member set. Each group is sorted and
/// groups are ordered by their smallest id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    pub clusters: Vec<Vec<u32>>,
    pub target_space: Space,
}

impl ClusterPartition {
    fn from_labels(members: &[u32], labels: &[Option<usize>], target_space: Space) -> Self {
        let n_groups = labels.iter().flatten().max().map_or(0, |&l| l + 1);
        let mut clusters: Vec<Vec<u32>> = vec![Vec::new(); n_groups];
        for (&id, label) in members.iter().zip(labels) {
            match label {
                Some(l) => clusters[*l].push(id),
                // noise stays as evidence of dispersion
                None => clusters.push(vec![id]),
            }
        }
        clusters.retain(|c| !c.is_empty());
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort_unstable_by_key(|c| c[0]);
        Self { clusters, target_space }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Grows a cluster from `seed_id` by breadth-first traversal of the kNN graph.
///
/// Every dequeued point offers each of its `k` neighbors for admission, with
/// probability equal to their normalized SNN similarity (or always, in
/// deterministic mode). Admitted neighbors join the member set once but are
/// enqueued on every admission, so points can be revisited. The walk stops
/// after `ceil(walk_ratio · N)` dequeues.
pub fn extract_cluster<R: Rng + ?Sized>(
    index: &SpaceIndex,
    seed_id: usize,
    rng: &mut R,
    config: &MetricConfig,
    source_space: Space,
) -> Result<ExtractedCluster> {
    let n = index.n_points();
    if seed_id >= n {
        return Err(Error::PointOutOfRange { id: seed_id, n });
    }
    let budget = config.walk_budget(n);
    let mut in_cluster = vec![false; n];
    let mut members = vec![seed_id as u32];
    in_cluster[seed_id] = true;
    let mut queue = VecDeque::from([seed_id as u32]);
    let mut dequeues = 0;
    while dequeues < budget {
        let Some(p) = queue.pop_front() else { break };
        dequeues += 1;
        let p = p as usize;
        for &nb in index.neighbors(p) {
            let admit = match config.extraction {
                ExtractionChoice::Deterministic => true,
                ExtractionChoice::Probabilistic => {
                    rng.random::<f64>() < index.similarity(p, nb as usize)
                }
            };
            if admit {
                if !in_cluster[nb as usize] {
                    in_cluster[nb as usize] = true;
                    members.push(nb);
                }
                queue.push_back(nb);
            }
        }
    }
    members.sort_unstable();
    Ok(ExtractedCluster { member_ids: members, seed_id: seed_id as u32, source_space })
}

/// Splits `members` into the groups they form in the opposite space.
///
/// HDBSCAN runs on the opposite space's distance matrix restricted to the
/// members; its noise points become singleton groups. K-Means and X-Means
/// run on the raw opposite-space coordinates.
pub fn cluster_in_opposite_space<R: Rng + ?Sized>(
    members: &[u32],
    opposite: &SpaceIndex,
    choice: ClusteringChoice,
    coords_opposite: &Matrix,
    rng: &mut R,
    target_space: Space,
) -> Result<ClusterPartition> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    if members.len() == 1 {
        return Ok(ClusterPartition { clusters: vec![members.to_vec()], target_space });
    }
    let labels: Vec<Option<usize>> = match choice {
        ClusteringChoice::HdbscanSnn => hdbscan(
            members.len(),
            |a, b| opposite.dist(members[a] as usize, members[b] as usize),
            &HdbscanParams::default(),
        ),
        ClusteringChoice::KMeans(k) => {
            let ids: Vec<usize> = members.iter().map(|&m| m as usize).collect();
            let pts = coords_opposite.select_rows(&ids);
            kmeans::kmeans(&pts, k.min(members.len()), rng).into_iter().map(Some).collect()
        }
        ClusteringChoice::XMeans => {
            let ids: Vec<usize> = members.iter().map(|&m| m as usize).collect();
            let pts = coords_opposite.select_rows(&ids);
            kmeans::xmeans(&pts, 2, 20, rng).into_iter().map(Some).collect()
        }
    };
    Ok(ClusterPartition::from_labels(members, &labels, target_space))
}

/// Unnormalized average-linkage distance `1 / (sim(A, B) + alpha)`, where
/// `sim(A, B)` averages the normalized SNN similarity over all cross pairs.
pub fn average_linkage_distance(a: &[u32], b: &[u32], index: &SpaceIndex) -> f64 {
    let mut sum = 0u64;
    for &p in a {
        for &q in b {
            sum += u64::from(index.raw_similarity(p as usize, q as usize));
        }
    }
    // integer sum is exact, so the result does not depend on argument order
    let avg = sum as f64 / ((a.len() * b.len()) as f64 * index.max_sim());
    1.0 / (avg + index.alpha())
}

fn centroid(ids: &[u32], coords: &Matrix) -> Vec<f64> {
    let mut c = vec![0.0; coords.cols()];
    for &i in ids {
        for (acc, v) in c.iter_mut().zip(coords.row(i as usize)) {
            *acc += v;
        }
    }
    let n = ids.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Distance between two disjoint groups on the scale of the space's
/// normalized distance matrix. Called on the hot path; inputs are trusted.
pub(crate) fn pair_distance_unchecked(
    a: &[u32],
    b: &[u32],
    index: &SpaceIndex,
    coords: &Matrix,
) -> f64 {
    let scale = if index.dist_max() > 0.0 { index.dist_max() } else { 1.0 };
    match index.distance_choice() {
        DistanceChoice::Snn => average_linkage_distance(a, b, index) / scale,
        DistanceChoice::Euclidean => {
            let (ca, cb) = (centroid(a, coords), centroid(b, coords));
            sqrt(crate::math::squared_euclidean(&ca, &cb)) / scale
        }
    }
}

/// `dist_cluster`: average-linkage SNN distance or centroid Euclidean
/// distance, divided by the same maximum that normalized the space's
/// distance matrix.
pub fn cluster_pair_distance(
    a: &[u32],
    b: &[u32],
    index: &SpaceIndex,
    coords: &Matrix,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let n = index.n_points();
    let mut seen = vec![false; n];
    for &p in a {
        let p = p as usize;
        if p >= n {
            return Err(Error::PointOutOfRange { id: p, n });
        }
        seen[p] = true;
    }
    for &q in b {
        let q = q as usize;
        if q >= n {
            return Err(Error::PointOutOfRange { id: q, n });
        }
        if seen[q] {
            return Err(Error::OverlappingClusters(q));
        }
    }
    Ok(pair_distance_unchecked(a, b, index, coords))
}

#[cfg(test)]
mod tests;
