//! Brute-force re-derivation of every deterministic quantity, written from
//! the definitions with no shared code and no cleverness: ranks by counting,
//! SNN by scanning both lists, distances from full tables. Meant for
//! N ≤ 12 or so.

use snc_core::metrics::PartialDistortionRecord;
use snc_core::{DistanceChoice, Matrix, MetricConfig, MetricKind, PairedEmbedding};

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `rank[i][j]`: 1 + number of points closer to `i` than `j`, ties by id.
/// `rank[i][i] = 0`.
pub fn ranks(coords: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = coords.len();
    let mut out = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = sq(&coords[i], &coords[j]);
            let mut r = 1;
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let dil = sq(&coords[i], &coords[l]);
                if dil < dij || (dil == dij && l < j) {
                    r += 1;
                }
            }
            out[i][j] = r;
        }
    }
    out
}

/// kNN lists in rank order.
pub fn knn(rank: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    rank.iter()
        .map(|row| {
            let mut list = vec![usize::MAX; k];
            for (j, &r) in row.iter().enumerate() {
                if r >= 1 && r <= k {
                    list[r - 1] = j;
                }
            }
            list
        })
        .collect()
}

/// `Σ (k+1-m)(k+1-n)` over equal entries at 1-based ranks `m`, `n`.
pub fn snn(a: &[usize], b: &[usize], k: usize) -> f64 {
    let mut s = 0.0;
    for m in 1..=k {
        for n in 1..=k {
            if a[m - 1] == b[n - 1] {
                s += ((k + 1 - m) * (k + 1 - n)) as f64;
            }
        }
    }
    s
}

/// One space, rebuilt from scratch.
pub struct SpaceOracle {
    pub coords: Vec<Vec<f64>>,
    pub knn: Vec<Vec<usize>>,
    /// Raw SNN table, the diagonal included.
    pub sim: Vec<Vec<f64>>,
    pub max_sim: f64,
    /// Distance table before normalization.
    pub raw_dist: Vec<Vec<f64>>,
    pub dist_max: f64,
    pub alpha: f64,
    pub distance: DistanceChoice,
}

impl SpaceOracle {
    pub fn new(m: &Matrix, k: usize, alpha: f64, distance: DistanceChoice) -> Self {
        let coords = rows(m);
        let n = coords.len();
        let knn = knn(&ranks(&coords), k);
        let sim: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| snn(&knn[i], &knn[j], k)).collect()).collect();
        let max_sim: f64 = (1..=k).map(|r| (r * r) as f64).sum();
        let raw_dist: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match distance {
                        DistanceChoice::Snn => 1.0 / (sim[i][j] / max_sim + alpha),
                        DistanceChoice::Euclidean => sq(&coords[i], &coords[j]).sqrt(),
                    })
                    .collect()
            })
            .collect();
        let dist_max = raw_dist.iter().flatten().copied().fold(0.0, f64::max);
        Self { coords, knn, sim, max_sim, raw_dist, dist_max, alpha, distance }
    }

    fn scale(&self) -> f64 {
        if self.dist_max > 0.0 {
            self.dist_max
        } else {
            1.0
        }
    }

    /// Normalized point distance.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.raw_dist[i][j] / self.scale()
    }

    /// Normalized cluster distance: average linkage of SNN similarities, or
    /// centroid distance.
    pub fn cluster_distance(&self, a: &[u32], b: &[u32]) -> f64 {
        let raw = match self.distance {
            DistanceChoice::Snn => {
                let mut total = 0.0;
                for &p in a {
                    for &q in b {
                        total += self.sim[p as usize][q as usize] / self.max_sim;
                    }
                }
                1.0 / (total / (a.len() * b.len()) as f64 + self.alpha)
            }
            DistanceChoice::Euclidean => {
                let centroid = |c: &[u32]| -> Vec<f64> {
                    let dim = self.coords[0].len();
                    (0..dim)
                        .map(|t| c.iter().map(|&p| self.coords[p as usize][t]).sum::<f64>() / c.len() as f64)
                        .collect()
                };
                sq(&centroid(a), &centroid(b)).sqrt()
            }
        };
        raw / self.scale()
    }
}

/// Both spaces plus the distortion extrema.
pub struct EmbeddingOracle {
    pub high: SpaceOracle,
    pub low: SpaceOracle,
    pub min_plus: f64,
    pub max_plus: f64,
    pub min_minus: f64,
    pub max_minus: f64,
}

impl EmbeddingOracle {
    pub fn new(e: &PairedEmbedding, config: &MetricConfig) -> Self {
        let high = SpaceOracle::new(e.original(), config.k_snn, config.alpha, config.distance);
        let low = SpaceOracle::new(e.projected(), config.k_snn, config.alpha, config.distance);
        let n = e.n_points();
        let (mut min_plus, mut max_plus) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_minus, mut max_minus) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = high.dist(i, j) - low.dist(i, j);
                let (p, m) = (d.max(0.0), (-d).max(0.0));
                min_plus = min_plus.min(p);
                max_plus = max_plus.max(p);
                min_minus = min_minus.min(m);
                max_minus = max_minus.max(m);
            }
        }
        Self { high, low, min_plus, max_plus, min_minus, max_minus }
    }

    /// `(μ, m, w)` of a cluster pair.
    pub fn pair(&self, a: &[u32], b: &[u32], kind: MetricKind) -> (f64, f64, f64) {
        let dh = self.high.cluster_distance(a, b);
        let dl = self.low.cluster_distance(a, b);
        let (mu, lo, hi) = match kind {
            MetricKind::Steadiness => ((dh - dl).max(0.0), self.min_plus, self.max_plus),
            MetricKind::Cohesiveness => ((dl - dh).max(0.0), self.min_minus, self.max_minus),
        };
        let m = if hi > lo { ((mu - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        (mu, m, (a.len() * b.len()) as f64)
    }

    /// `1 - Σwm/Σw` over recomputed records; 1 when there are none.
    pub fn score(&self, records: &[PartialDistortionRecord]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for r in records {
            let (_, m, w) = self.pair(&r.cluster_i, &r.cluster_j, r.kind);
            num += w * m;
            den += w;
        }
        if den > 0.0 {
            1.0 - num / den
        } else {
            1.0
        }
    }
}

/// Members reached by deterministic extraction: FIFO traversal of the kNN
/// graph from `seed`, every neighbor admitted, `budget` dequeues.
pub fn deterministic_extraction(knn: &[Vec<usize>], seed: usize, budget: usize) -> Vec<usize> {
    let mut members = vec![seed];
    let mut queue = std::collections::VecDeque::from([seed]);
    let mut dequeues = 0;
    while let Some(p) = queue.pop_front() {
        if dequeues == budget {
            break;
        }
        dequeues += 1;
        for &q in &knn[p] {
            if !members.contains(&q) {
                members.push(q);
            }
            queue.push_back(q);
        }
    }
    members.sort_unstable();
    members
}

/// Exhaustive rank-based baselines.
pub struct RankOracle {
    pub high: Vec<Vec<usize>>,
    pub low: Vec<Vec<usize>>,
}

impl RankOracle {
    pub fn new(e: &PairedEmbedding) -> Self {
        Self { high: ranks(&rows(e.original())), low: ranks(&rows(e.projected())) }
    }

    fn n(&self) -> usize {
        self.high.len()
    }

    /// Σ over pairs in `near`'s kNN but outside `far`'s of `far`-rank − k.
    fn intrusion(near: &[Vec<usize>], far: &[Vec<usize>], k: usize) -> f64 {
        let n = near.len() as f64;
        let mut total = 0usize;
        for i in 0..near.len() {
            for j in 0..near.len() {
                if i != j && near[i][j] <= k && far[i][j] > k {
                    total += far[i][j] - k;
                }
            }
        }
        let kf = k as f64;
        1.0 - 2.0 / (n * kf * (2.0 * n - 3.0 * kf - 1.0)) * total as f64
    }

    pub fn trustworthiness(&self, k: usize) -> f64 {
        Self::intrusion(&self.low, &self.high, k)
    }

    pub fn continuity(&self, k: usize) -> f64 {
        Self::intrusion(&self.high, &self.low, k)
    }

    fn mrre(own: &[Vec<usize>], other: &[Vec<usize>], k: usize) -> f64 {
        let n = own.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for r in 1..=k {
                let j = (0..n).find(|&j| j != i && own[i][j] == r).expect("rank exists");
                row += own[i][j].abs_diff(other[i][j]) as f64 / r as f64;
            }
            total += row;
        }
        let nf = n as f64;
        let worst = nf * (1..=k).map(|r| (nf - 2.0 * r as f64 + 1.0).abs() / r as f64).sum::<f64>();
        1.0 - total / worst
    }

    pub fn mrre_missing(&self, k: usize) -> f64 {
        Self::mrre(&self.high, &self.low, k)
    }

    pub fn mrre_false(&self, k: usize) -> f64 {
        Self::mrre(&self.low, &self.high, k)
    }

    pub fn lcmc(&self, k: usize) -> f64 {
        let n = self.n();
        let shared = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.high[i][j] <= k && self.low[i][j] <= k)
            .count();
        shared as f64 / (n * k) as f64 - k as f64 / (n - 1) as f64
    }
}
