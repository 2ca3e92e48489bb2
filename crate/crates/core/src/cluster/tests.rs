use alloc::vec;
use alloc::vec::Vec;

use approx::assert_relative_eq;

use super::*;
use crate::knn::KnnLists;
use crate::model::RngStream;
use crate::snn::build_space_index;

/// Four points on a ring; each lists its two ring neighbors.
fn ring_index(sim: u32) -> SpaceIndex {
    let knn = KnnLists::from_flat(2, vec![1, 3, 2, 0, 3, 1, 0, 2]).unwrap();
    let mut raw = vec![sim; 16];
    for i in 0..4 {
        raw[i * 4 + i] = 5;
    }
    SpaceIndex::from_parts(knn, raw, 5.0, 0.1, DistanceChoice::Snn, Matrix::zeros(4, 4), 1.0)
}

#[test]
fn zero_similarity_extracts_only_the_seed() {
    let idx = ring_index(0);
    let cfg = MetricConfig { k_snn: 2, walk_ratio: 1.0, ..Default::default() };
    let c = extract_cluster(&idx, 2, &mut RngStream::new(1, 0), &cfg, Space::Projected).unwrap();
    assert_eq!(c.member_ids, vec![2]);
    assert_eq!(c.seed_id, 2);
}

#[test]
fn deterministic_extraction_reaches_component() {
    let idx = ring_index(0);
    let cfg = MetricConfig {
        k_snn: 2,
        walk_ratio: 1.0,
        extraction: ExtractionChoice::Deterministic,
        ..Default::default()
    };
    let c = extract_cluster(&idx, 0, &mut RngStream::new(1, 0), &cfg, Space::Projected).unwrap();
    assert_eq!(c.member_ids, vec![0, 1, 2, 3]);
}

#[test]
fn extraction_budget_counts_dequeues() {
    // a path 0-1-2-...-9 walked deterministically, one dequeue per point
    let n = 10;
    let mut ids = Vec::new();
    for i in 0..n {
        ids.push(((i + 1) % n) as u32);
    }
    let knn = KnnLists::from_flat(1, ids).unwrap();
    let idx = SpaceIndex::from_parts(
        knn,
        vec![1; n * n],
        1.0,
        0.1,
        DistanceChoice::Snn,
        Matrix::zeros(n, n),
        1.0,
    );
    let cfg = MetricConfig {
        k_snn: 1,
        walk_ratio: 0.3,
        extraction: ExtractionChoice::Deterministic,
        ..Default::default()
    };
    let c = extract_cluster(&idx, 0, &mut RngStream::new(0, 0), &cfg, Space::Original).unwrap();
    // 3 dequeues: 0, 1, 2 each admit their successor
    assert_eq!(c.member_ids, vec![0, 1, 2, 3]);
}

#[test]
fn extraction_rejects_bad_seed() {
    let idx = ring_index(1);
    let cfg = MetricConfig { k_snn: 2, ..Default::default() };
    assert_eq!(
        extract_cluster(&idx, 4, &mut RngStream::new(0, 0), &cfg, Space::Original).unwrap_err(),
        Error::PointOutOfRange { id: 4, n: 4 }
    );
}

fn scattered(n: usize, seed: u64) -> Matrix {
    let mut rng = RngStream::new(seed, 99);
    let rows: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

#[test]
fn extraction_is_deterministic_per_stream() {
    let m = scattered(10, 3);
    let cfg = MetricConfig { k_snn: 3, ..Default::default() };
    let idx = build_space_index(&m, &cfg).unwrap();
    let a = extract_cluster(&idx, 4, &mut RngStream::new(5, 2), &cfg, Space::Projected).unwrap();
    let b = extract_cluster(&idx, 4, &mut RngStream::new(5, 2), &cfg, Space::Projected).unwrap();
    assert_eq!(a, b);
    assert!(a.member_ids.contains(&4));
}

/// Two tight blobs far apart, `per` points each.
fn two_blobs(per: usize) -> Matrix {
    let mut rows = Vec::new();
    for b in 0..2 {
        for i in 0..per {
            let t = i as f64;
            rows.push([b as f64 * 100.0 + crate::math::sin(t) * 0.5, crate::math::cos(t * 1.3) * 0.5]);
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Single-linkage split at the largest gap: components after removing every
/// edge longer than `threshold`.
fn single_linkage_components(ids: &[u32], d: impl Fn(usize, usize) -> f64, threshold: f64) -> Vec<Vec<u32>> {
    let n = ids.len();
    let mut comp: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if d(ids[a] as usize, ids[b] as usize) <= threshold && comp[b] < comp[a] {
                    comp[a] = comp[b];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: Vec<Vec<u32>> = Vec::new();
    for root in 0..n {
        let g: Vec<u32> = (0..n).filter(|&i| comp[i] == root).map(|i| ids[i]).collect();
        if !g.is_empty() {
            groups.push(g);
        }
    }
    groups
}

#[test]
fn hdbscan_matches_single_linkage_gap() {
    let m = two_blobs(12);
    let cfg = MetricConfig { k_snn: 5, ..Default::default() };
    let idx = build_space_index(&m, &cfg).unwrap();
    let members: Vec<u32> = (0..24).collect();
    let part = cluster_in_opposite_space(
        &members,
        &idx,
        ClusteringChoice::HdbscanSnn,
        &m,
        &mut RngStream::new(0, 0),
        Space::Original,
    )
    .unwrap();
    // every cross-blob distance is the maximum, every intra-blob one is below it
    let oracle = single_linkage_components(&members, |a, b| idx.dist(a, b), 0.999_999);
    assert_eq!(oracle.len(), 2);
    let big: Vec<&Vec<u32>> = part.clusters.iter().filter(|c| c.len() > 1).collect();
    assert_eq!(big.len(), 2);
    for c in big {
        assert!(oracle.iter().any(|o| c.iter().all(|id| o.contains(id))));
    }
}

#[test]
fn singleton_members() {
    let m = two_blobs(6);
    let cfg = MetricConfig { k_snn: 3, ..Default::default() };
    let idx = build_space_index(&m, &cfg).unwrap();
    for choice in [ClusteringChoice::HdbscanSnn, ClusteringChoice::KMeans(4), ClusteringChoice::XMeans] {
        let p = cluster_in_opposite_space(&[7], &idx, choice, &m, &mut RngStream::new(0, 0), Space::Original)
            .unwrap();
        assert_eq!(p.clusters, vec![vec![7]]);
    }
    assert_eq!(
        cluster_in_opposite_space(&[], &idx, ClusteringChoice::HdbscanSnn, &m, &mut RngStream::new(0, 0), Space::Original)
            .unwrap_err(),
        Error::EmptyCluster
    );
}

#[test]
fn kmeans_partition_caps_k() {
    let m = two_blobs(6);
    let cfg = MetricConfig { k_snn: 3, ..Default::default() };
    let idx = build_space_index(&m, &cfg).unwrap();
    let p = cluster_in_opposite_space(&[0, 3, 9], &idx, ClusteringChoice::KMeans(5), &m, &mut RngStream::new(2, 0), Space::Projected)
        .unwrap();
    assert_eq!(p.clusters, vec![vec![0], vec![3], vec![9]]);
}

#[test]
fn partitions_cover_members_exactly() {
    let m = scattered(40, 8);
    let cfg = MetricConfig { k_snn: 6, ..Default::default() };
    let idx = build_space_index(&m, &cfg).unwrap();
    let members: Vec<u32> = (0..40).filter(|i| i % 3 != 0).collect();
    for choice in [ClusteringChoice::HdbscanSnn, ClusteringChoice::KMeans(4), ClusteringChoice::XMeans] {
        let p = cluster_in_opposite_space(&members, &idx, choice, &m, &mut RngStream::new(1, 1), Space::Original)
            .unwrap();
        let mut all: Vec<u32> = p.clusters.concat();
        all.sort_unstable();
        assert_eq!(all, members, "{choice}");
        assert!(p.clusters.iter().all(|c| !c.is_empty()));
    }
}

#[test]
fn linkage_examples() {
    // avg of 0.2 and 0.6 -> 1 / (0.4 + 0.1)
    let knn = KnnLists::from_flat(1, vec![1, 0, 0]).unwrap();
    let raw = vec![10, 0, 2, 0, 10, 6, 2, 6, 10];
    let idx = SpaceIndex::from_parts(knn, raw, 10.0, 0.1, DistanceChoice::Snn, Matrix::zeros(3, 3), 10.0);
    assert_relative_eq!(average_linkage_distance(&[0, 1], &[2], &idx), 2.0, epsilon = 1e-12);
    assert_relative_eq!(cluster_pair_distance(&[0, 1], &[2], &idx, &Matrix::zeros(3, 1)).unwrap(), 0.2, epsilon = 1e-12);
    // no shared neighbors at all -> 1 / alpha
    assert_relative_eq!(average_linkage_distance(&[0], &[1], &idx), 10.0);
    assert_eq!(
        cluster_pair_distance(&[0, 1], &[1], &idx, &Matrix::zeros(3, 1)).unwrap_err(),
        Error::OverlappingClusters(1)
    );
    assert_eq!(cluster_pair_distance(&[], &[1], &idx, &Matrix::zeros(3, 1)).unwrap_err(), Error::EmptyCluster);
}

#[test]
fn singleton_pair_distance_is_matrix_entry() {
    let m = scattered(15, 2);
    for distance in [DistanceChoice::Snn, DistanceChoice::Euclidean] {
        let cfg = MetricConfig { k_snn: 4, distance, ..Default::default() };
        let idx = build_space_index(&m, &cfg).unwrap();
        for (p, q) in [(0u32, 1u32), (3, 14), (7, 2)] {
            let d = cluster_pair_distance(&[p], &[q], &idx, &m).unwrap();
            assert_relative_eq!(d, idx.dist(p as usize, q as usize), epsilon = 1e-15);
            assert_eq!(d, cluster_pair_distance(&[q], &[p], &idx, &m).unwrap());
        }
    }
}
