//! Rank-based local distortion metrics: Trustworthiness & Continuity,
//! mean relative rank errors, and the local continuity meta-criterion.
//!
//! Ranks are 1-based positions in a point's Euclidean distance ordering,
//! ties broken by id. `r_h(i, j)` is the rank in the original space and
//! `r_l(i, j)` the rank in the projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::squared_euclidean;
use crate::matrix::Matrix;
use crate::model::PairedEmbedding;
use crate::par;

/// Full neighbor rankings of one space. `rank(i, i) == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    ranks: Vec<u32>,
    /// Row `i` lists the other ids nearest first.
    order: Vec<u32>,
}

impl RankTable {
    pub fn new(coords: &Matrix) -> Self {
        let n = coords.rows();
        let rows = par::map_range(n, |i| {
            let p = coords.row(i);
            let mut others: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_euclidean(p, coords.row(j)), j as u32))
                .collect();
            others.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut rank = vec![0u32; n];
            for (r, &(_, j)) in others.iter().enumerate() {
                rank[j as usize] = r as u32 + 1;
            }
            (rank, others.into_iter().map(|(_, j)| j).collect::<Vec<u32>>())
        });
        let mut ranks = Vec::with_capacity(n * n);
        let mut order = Vec::with_capacity(n * n.saturating_sub(1));
        for (r, o) in rows {
            ranks.extend(r);
            order.extend(o);
        }
        Self { n, ranks, order }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }

    /// The `k` nearest neighbors of `i`.
    #[inline]
    pub fn knn(&self, i: usize, k: usize) -> &[u32] {
        let w = self.n - 1;
        &self.order[i * w..i * w + k]
    }
}

/// Rank tables of both spaces.
#[derive(Debug, Clone)]
pub struct RankPair {
    pub high: RankTable,
    pub low: RankTable,
}

impl RankPair {
    pub fn new(embedding: &PairedEmbedding) -> Self {
        Self { high: RankTable::new(embedding.original()), low: RankTable::new(embedding.projected()) }
    }

    fn n(&self) -> usize {
        self.high.n_points()
    }
}

fn check_half(k: usize, n: usize) -> Result<()> {
    // 2N - 3k - 1 must stay positive
    if k == 0 || 2 * k >= n {
        return Err(Error::KOutOfRange { k, n, requirement: "1 <= k < N/2" });
    }
    Ok(())
}

fn check_below_n(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n, requirement: "1 <= k < N" });
    }
    Ok(())
}

/// Penalty of neighbors that are in `near`'s kNN but not `far`'s, by their
/// excess rank in `far`, with Venna & Kaski's normalization.
fn rank_intrusion(near: &RankTable, far: &RankTable, k: usize) -> f64 {
    let n = near.n_points();
    let kk = k as u32;
    let total: u64 = par::map_range(n, |i| {
        near.knn(i, k)
            .iter()
            .map(|&j| far.rank(i, j as usize))
            .filter(|&r| r > kk)
            .map(|r| u64::from(r - kk))
            .sum::<u64>()
    })
    .into_iter()
    .sum();
    let (nf, kf) = (n as f64, k as f64);
    1.0 - 2.0 / (nf * kf * (2.0 * nf - 3.0 * kf - 1.0)) * total as f64
}

/// Trustworthiness: penalizes projected neighbors that are not original
/// neighbors (False Neighbors) by their original-space rank.
pub fn trustworthiness(ranks: &RankPair, k: usize) -> Result<f64> {
    check_half(k, ranks.n())?;
    Ok(rank_intrusion(&ranks.low, &ranks.high, k))
}

/// Continuity: penalizes original neighbors missing from the projected
/// neighborhood (Missing Neighbors) by their projected rank.
pub fn continuity(ranks: &RankPair, k: usize) -> Result<f64> {
    check_half(k, ranks.n())?;
    Ok(rank_intrusion(&ranks.high, &ranks.low, k))
}

/// Worst-case normalizer `N · Σ_{r=1..k} |N - 2r + 1| / r`.
fn mrre_normalizer(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    nf * (1..=k).map(|r| (nf - 2.0 * r as f64 + 1.0).abs() / r as f64).sum::<f64>()
}

/// Sum over `neighborhood`'s kNN of `|r_h - r_l| / r` with `r` the rank in
/// the neighborhood's own space.
fn relative_rank_error(neighborhood: &RankTable, other: &RankTable, k: usize) -> f64 {
    let n = neighborhood.n_points();
    let total: f64 = par::map_range(n, |i| {
        neighborhood
            .knn(i, k)
            .iter()
            .map(|&j| {
                let own = neighborhood.rank(i, j as usize);
                let far = other.rank(i, j as usize);
                f64::from(own.abs_diff(far)) / f64::from(own)
            })
            .sum::<f64>()
    })
    .into_iter()
    .sum();
    total / mrre_normalizer(n, k)
}

/// Which way MRREs are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MrreOrientation {
    /// `1 - error`, higher is better.
    #[default]
    Quality,
    /// The raw normalized error.
    Error,
}

fn orient(err: f64, orientation: MrreOrientation) -> f64 {
    match orientation {
        MrreOrientation::Quality => 1.0 - err,
        MrreOrientation::Error => err,
    }
}

/// MRRE over original-space neighborhoods (rank errors of Missing and True
/// Neighbors).
pub fn mrre_missing(ranks: &RankPair, k: usize, orientation: MrreOrientation) -> Result<f64> {
    check_below_n(k, ranks.n())?;
    Ok(orient(relative_rank_error(&ranks.high, &ranks.low, k), orientation))
}

/// MRRE over projected neighborhoods (rank errors of False and True
/// Neighbors).
pub fn mrre_false(ranks: &RankPair, k: usize, orientation: MrreOrientation) -> Result<f64> {
    check_below_n(k, ranks.n())?;
    Ok(orient(relative_rank_error(&ranks.low, &ranks.high, k), orientation))
}

/// LCMC: mean kNN overlap fraction minus its chance level `k / (N - 1)`.
pub fn lcmc(ranks: &RankPair, k: usize) -> Result<f64> {
    let n = ranks.n();
    check_below_n(k, n)?;
    let kk = k as u32;
    let overlap: usize = par::map_range(n, |i| {
        ranks.high.knn(i, k).iter().filter(|&&j| ranks.low.rank(i, j as usize) <= kk).count()
    })
    .into_iter()
    .sum();
    Ok(overlap as f64 / (n * k) as f64 - k as f64 / (n - 1) as f64)
}

/// The baseline metrics by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Baseline {
    Trustworthiness,
    Continuity,
    MrreMissing,
    MrreFalse,
    Lcmc,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Trustworthiness,
        Baseline::Continuity,
        Baseline::MrreMissing,
        Baseline::MrreFalse,
        Baseline::Lcmc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Trustworthiness => "trustworthiness",
            Baseline::Continuity => "continuity",
            Baseline::MrreMissing => "mrre_missing",
            Baseline::MrreFalse => "mrre_false",
            Baseline::Lcmc => "lcmc",
        }
    }

    pub fn evaluate(self, ranks: &RankPair, k: usize) -> Result<f64> {
        match self {
            Baseline::Trustworthiness => trustworthiness(ranks, k),
            Baseline::Continuity => continuity(ranks, k),
            Baseline::MrreMissing => mrre_missing(ranks, k, MrreOrientation::Quality),
            Baseline::MrreFalse => mrre_false(ranks, k, MrreOrientation::Quality),
            Baseline::Lcmc => lcmc(ranks, k),
        }
    }
}
