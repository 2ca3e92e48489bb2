//! Built-in verification run by `snc selftest` and reused by the test
//! suites: random small instances checked against [`oracle`], plus the
//! exact-score identities.

pub mod oracle;

use std::fmt;

use rand::Rng;
use snc_core::baselines::{Baseline, RankPair};
use snc_core::metrics::{aggregate, measure, Prepared};
use snc_core::{
    ClusteringChoice, DistanceChoice, ExtractionChoice, Matrix, MetricConfig, MetricKind, PairedEmbedding, RngStream,
};

use oracle::{deterministic_extraction, EmbeddingOracle, RankOracle};

pub const TOLERANCE: f64 = 1e-10;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {}  ({})", self.name, self.detail)
    }
}

fn uniform(n: usize, dim: usize, rng: &mut RngStream) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    Matrix::from_rows(&rows).expect("rectangular")
}

/// A random instance with `N ∈ [4, 12]`, `k ∈ [1, 3]` and a random mix of
/// configuration choices.
pub fn small_instance(rng: &mut RngStream) -> (PairedEmbedding, MetricConfig) {
    let n = rng.random_range(4..=12);
    let high_dim = rng.random_range(1..=5);
    let low_dim = rng.random_range(1..=high_dim);
    let high = uniform(n, high_dim, rng);
    let low = if rng.random_bool(0.15) { high.clone() } else { uniform(n, low_dim, rng) };
    let e = PairedEmbedding::new(high, low).expect("valid instance");
    let clustering = match rng.random_range(0..4) {
        0 => ClusteringChoice::KMeans(rng.random_range(1..=4)),
        1 => ClusteringChoice::XMeans,
        _ => ClusteringChoice::HdbscanSnn,
    };
    let config = MetricConfig {
        k_snn: rng.random_range(1..=3.min(n - 1)),
        iterations: rng.random_range(1..=25),
        alpha: [0.1, 0.05, 1.0][rng.random_range(0..3)],
        walk_ratio: [0.4, 0.2, 1.0][rng.random_range(0..3)],
        seed: rng.random(),
        clustering,
        distance: if rng.random_bool(0.25) { DistanceChoice::Euclidean } else { DistanceChoice::Snn },
        extraction: if rng.random_bool(0.3) { ExtractionChoice::Deterministic } else { ExtractionChoice::Probabilistic },
        include_zero_sign_pairs: true,
        mirror_streams: false,
    };
    (e, config)
}

/// Largest deviation between the pipeline and the oracle on one instance,
/// or a description of the first structural mismatch.
pub fn oracle_deviation(e: &PairedEmbedding, config: &MetricConfig) -> Result<f64, String> {
    let prepared = Prepared::new(e, config).map_err(|err| err.to_string())?;
    let o = EmbeddingOracle::new(e, config);
    let n = e.n_points();
    let mut worst: f64 = 0.0;
    let mut track = |what: &str, a: f64, b: f64| -> Result<(), String> {
        let d = (a - b).abs();
        // NaN fails too
        if d.is_nan() || d > TOLERANCE {
            return Err(format!("{what}: pipeline {a} vs oracle {b}"));
        }
        worst = worst.max(d);
        Ok(())
    };
    for (space, idx, orc) in [("high", &prepared.high, &o.high), ("low", &prepared.low, &o.low)] {
        for i in 0..n {
            let got: Vec<usize> = idx.neighbors(i).iter().map(|&j| j as usize).collect();
            if got != orc.knn[i] {
                return Err(format!("{space} kNN of {i}: {got:?} vs {:?}", orc.knn[i]));
            }
            for j in 0..n {
                if i != j {
                    track(&format!("{space} sim({i},{j})"), f64::from(idx.raw_similarity(i, j)), orc.sim[i][j])?;
                }
                track(&format!("{space} dist({i},{j})"), idx.dist(i, j), orc.dist(i, j))?;
            }
        }
        track(&format!("{space} max_sim"), idx.max_sim(), orc.max_sim)?;
    }
    let dm = &prepared.distortion;
    track("min D+", dm.min_plus, o.min_plus)?;
    track("max D+", dm.max_plus, o.max_plus)?;
    track("min D-", dm.min_minus, o.min_minus)?;
    track("max D-", dm.max_minus, o.max_minus)?;
    for i in 0..n {
        for j in 0..n {
            let d = o.high.dist(i, j) - o.low.dist(i, j);
            track("D+", dm.d_plus(i, j), d.max(0.0))?;
            track("D-", dm.d_minus(i, j), (-d).max(0.0))?;
        }
    }
    let m = measure(e, &prepared, config).map_err(|err| err.to_string())?;
    for r in m.compress.iter().chain(&m.stretch) {
        let (mu, mm, w) = o.pair(&r.cluster_i, &r.cluster_j, r.kind);
        track("mu", r.mu, mu)?;
        track("m", r.m, mm)?;
        track("w", r.w, w)?;
    }
    let scores = aggregate(&m.compress, &m.stretch);
    track("steadiness", scores.steadiness, o.score(&m.compress))?;
    track("cohesiveness", scores.cohesiveness, o.score(&m.stretch))?;
    if config.extraction == ExtractionChoice::Deterministic {
        let logs = [
            (&m.diagnostics.steadiness_iterations, &o.low.knn, MetricKind::Steadiness, &m.compress),
            (&m.diagnostics.cohesiveness_iterations, &o.high.knn, MetricKind::Cohesiveness, &m.stretch),
        ];
        for (log, knn, kind, records) in logs {
            for (it, s) in log.iter().enumerate() {
                let members = deterministic_extraction(knn, s.seed_id as usize, config.walk_budget(n));
                if members.len() != s.extracted_size {
                    return Err(format!("{kind:?} iteration {it}: extracted {} vs {}", s.extracted_size, members.len()));
                }
                let mut covered: Vec<usize> = records
                    .iter()
                    .filter(|r| r.iteration == it)
                    .flat_map(|r| r.cluster_i.iter().chain(r.cluster_j.iter()).map(|&p| p as usize))
                    .collect();
                covered.sort_unstable();
                covered.dedup();
                if s.n_clusters > 1 && covered != members {
                    return Err(format!("{kind:?} iteration {it}: groups do not cover the extracted cluster"));
                }
            }
        }
    }
    Ok(worst)
}

/// Largest deviation between the baselines and the exhaustive rank oracle
/// over `k ∈ [1, 3]`.
pub fn baseline_deviation(e: &PairedEmbedding) -> Result<f64, String> {
    let ranks = RankPair::new(e);
    let o = RankOracle::new(e);
    let n = e.n_points();
    let mut worst: f64 = 0.0;
    for k in 1..=3usize.min(n - 1) {
        for b in Baseline::ALL {
            let expected = match b {
                Baseline::Trustworthiness | Baseline::Continuity if 2 * k >= n => continue,
                Baseline::Trustworthiness => o.trustworthiness(k),
                Baseline::Continuity => o.continuity(k),
                Baseline::MrreMissing => o.mrre_missing(k),
                Baseline::MrreFalse => o.mrre_false(k),
                Baseline::Lcmc => o.lcmc(k),
            };
            let got = b.evaluate(&ranks, k).map_err(|err| err.to_string())?;
            if got != expected {
                return Err(format!("{} at k={k}: {got} vs {expected}", b.name()));
            }
            worst = worst.max((got - expected).abs());
        }
    }
    Ok(worst)
}

fn summarize(name: &str, outcomes: impl Iterator<Item = Result<f64, String>>) -> Check {
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for o in outcomes {
        count += 1;
        match o {
            Ok(d) => worst = worst.max(d),
            Err(e) => return Check { name: name.into(), passed: false, detail: format!("instance {count}: {e}") },
        }
    }
    Check { name: name.into(), passed: true, detail: format!("{count} instances, max deviation {worst:.1e}") }
}

/// Oracle equivalence of the metric pipeline on `instances` random small
/// instances.
pub fn check_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = RngStream::new(seed, 0);
    let cases: Vec<_> = (0..instances).map(|_| small_instance(&mut rng)).collect();
    summarize("metric pipeline matches brute-force oracle", cases.iter().map(|(e, c)| oracle_deviation(e, c)))
}

/// Baselines against the exhaustive rank oracle.
pub fn check_baselines(instances: usize, seed: u64) -> Check {
    let mut rng = RngStream::new(seed, 1);
    let cases: Vec<_> = (0..instances).map(|_| small_instance(&mut rng).0).collect();
    summarize("baselines match exhaustive rank oracle", cases.iter().map(baseline_deviation))
}

/// A projection onto itself scores exactly 1 everywhere.
pub fn check_self_projection(seed: u64) -> Check {
    let mut rng = RngStream::new(seed, 2);
    let x = uniform(120, 4, &mut rng);
    let e = PairedEmbedding::new(x.clone(), x).expect("valid");
    let config = MetricConfig { k_snn: 10, iterations: 50, seed, ..Default::default() };
    let (s, _) = snc_core::metrics::compute_scores(&e, &config).expect("valid config");
    let ranks = RankPair::new(&e);
    let baselines_ok = Baseline::ALL.iter().all(|b| {
        let want = if *b == Baseline::Lcmc { 1.0 - 10.0 / 119.0 } else { 1.0 };
        b.evaluate(&ranks, 10).map(|v| (v - want).abs() < 1e-12).unwrap_or(false)
    });
    Check {
        name: "self-projection scores 1".into(),
        passed: s.steadiness == 1.0 && s.cohesiveness == 1.0 && baselines_ok,
        detail: format!("steadiness {}, cohesiveness {}, baselines at maximum: {baselines_ok}", s.steadiness, s.cohesiveness),
    }
}

/// Swapping the spaces and the random streams swaps the scores.
pub fn check_swap_symmetry(seed: u64) -> Check {
    let mut rng = RngStream::new(seed, 3);
    let e = PairedEmbedding::new(uniform(80, 3, &mut rng), uniform(80, 3, &mut rng)).expect("valid");
    let config = MetricConfig { k_snn: 8, iterations: 40, seed, ..Default::default() };
    let (a, _) = snc_core::metrics::compute_scores(&e, &config).expect("valid config");
    let (b, _) = snc_core::metrics::compute_scores(&e.swapped().expect("equal dims"), &config.mirrored())
        .expect("valid config");
    Check {
        name: "swap symmetry".into(),
        passed: a.steadiness == b.cohesiveness && a.cohesiveness == b.steadiness,
        detail: format!("({}, {}) vs swapped ({}, {})", a.steadiness, a.cohesiveness, b.steadiness, b.cohesiveness),
    }
}

/// Every built-in check.
pub fn run_all(instances: usize, seed: u64) -> Vec<Check> {
    vec![
        check_oracle(instances, seed),
        check_baselines(instances, seed),
        check_self_projection(seed),
        check_swap_symmetry(seed),
    ]
}
