//! The reliability-map document (`map.json`) read by the browser viewer.
//!
//! Each projected point carries its two pointwise distortions. Edges of the
//! projection's `k_map`-NN graph carry the sum of their endpoints' values per
//! channel, raw and min-max normalized over all edges. The registration
//! lists come from the Missing Groups channel: selecting a group of points
//! in the viewer highlights the points they were torn away from.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use snc_core::knn::build_knn;
use snc_core::{MetricConfig, MetricScores, PairedEmbedding, PointwiseDistortionField};

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_K_MAP: usize = 9;
/// Registrations at or below this strength are dropped.
pub const MIN_REGISTRATION: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExportError {
    #[error("k_map must be in [1, N-1] (k_map={k_map}, N={n})")]
    KMap { k_map: usize, n: usize },
    #[error("the reliability map needs a 2-D projection, got {0} columns")]
    NotPlanar(usize),
    #[error("distortion field has {field} points, embedding has {embedding}")]
    FieldSize { field: usize, embedding: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    pub steadiness_distortion: f64,
    pub cohesiveness_distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEdge {
    pub p: u32,
    pub q: u32,
    /// Normalized to [0, 1] over all edges.
    pub false_groups_value: f64,
    pub missing_groups_value: f64,
    pub false_groups_raw: f64,
    pub missing_groups_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub target_id: u32,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapScores {
    pub steadiness: f64,
    pub cohesiveness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityMapDocument {
    pub schema_version: String,
    pub k_map: usize,
    pub points: Vec<MapPoint>,
    pub edges: Vec<MapEdge>,
    /// `registration[i]` lists the points registered to point `i`.
    pub registration: Vec<Vec<Registration>>,
    pub scores: MapScores,
    pub config_echo: MetricConfig,
}

fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                (v - lo) / range
            } else if v > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Undirected, deduplicated edges of the `k`-NN graph, ordered by `(p, q)`
/// with `p < q`.
pub fn knn_edges(coords: &snc_core::Matrix, k: usize) -> Result<Vec<(u32, u32)>, ExportError> {
    let n = coords.rows();
    if k == 0 || k >= n {
        return Err(ExportError::KMap { k_map: k, n });
    }
    let knn = build_knn(coords, k).map_err(|_| ExportError::KMap { k_map: k, n })?;
    let mut set = BTreeSet::new();
    for i in 0..n {
        for &j in knn.neighbors(i) {
            let i = i as u32;
            set.insert((i.min(j), i.max(j)));
        }
    }
    Ok(set.into_iter().collect())
}

pub fn export_reliability_map(
    embedding: &PairedEmbedding,
    field: &PointwiseDistortionField,
    scores: &MetricScores,
    config: &MetricConfig,
    k_map: usize,
) -> Result<ReliabilityMapDocument, ExportError> {
    let proj = embedding.projected();
    let n = embedding.n_points();
    if proj.cols() != 2 {
        return Err(ExportError::NotPlanar(proj.cols()));
    }
    if field.n_points() != n {
        return Err(ExportError::FieldSize { field: field.n_points(), embedding: n });
    }
    let edges = knn_edges(proj, k_map)?;
    let labels = embedding.labels();
    let points = (0..n)
        .map(|i| MapPoint {
            id: i as u32,
            x: proj.get(i, 0),
            y: proj.get(i, 1),
            label: labels.map(|l| l[i]),
            steadiness_distortion: field.steadiness[i],
            cohesiveness_distortion: field.cohesiveness[i],
        })
        .collect();
    let sum = |v: &[f64], (p, q): (u32, u32)| v[p as usize] + v[q as usize];
    let fg: Vec<f64> = edges.iter().map(|&e| sum(&field.steadiness, e)).collect();
    let mg: Vec<f64> = edges.iter().map(|&e| sum(&field.cohesiveness, e)).collect();
    let (fg_n, mg_n) = (normalize(&fg), normalize(&mg));
    let edges = edges
        .iter()
        .enumerate()
        .map(|(e, &(p, q))| MapEdge {
            p,
            q,
            false_groups_value: fg_n[e],
            missing_groups_value: mg_n[e],
            false_groups_raw: fg[e],
            missing_groups_raw: mg[e],
        })
        .collect();
    let registration = field
        .cohesiveness_registration
        .iter()
        .map(|list| {
            list.iter()
                .filter(|&&(_, s)| s > MIN_REGISTRATION)
                .map(|&(target_id, strength)| Registration { target_id, strength })
                .collect()
        })
        .collect();
    Ok(ReliabilityMapDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        k_map,
        points,
        edges,
        registration,
        scores: MapScores { steadiness: scores.steadiness, cohesiveness: scores.cohesiveness },
        config_echo: config.clone(),
    })
}
