//! Iterative partial-distortion measurement and its aggregation into
//! Steadiness and Cohesiveness.
//!
//! One iteration picks a random seed point, grows a cluster around it in the
//! source space, and splits that cluster in the opposite space. Every pair of
//! resulting groups `(Ci, Cj)` is compared by its cluster distance in the
//! original space (`δh`) and in the projection (`δl`):
//!
//! ```text
//! compress  μ = max(δh - δl, 0)    m = (μ - min D⁺) / (max D⁺ - min D⁺)
//! stretch   μ = max(δl - δh, 0)    m = (μ - min D⁻) / (max D⁻ - min D⁻)
//! w = |Ci| · |Cj|
//! ```
//!
//! Steadiness uses compress records, Cohesiveness stretch records, and each
//! score is `1 - Σ w·m / Σ w`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cluster::{cluster_in_opposite_space, extract_cluster, pair_distance_unchecked, Space};
use crate::error::{Error, Result};
use crate::model::{MetricConfig, PairedEmbedding, RngStream};
use crate::par;
use crate::snn::{build_distortion_matrices, build_space_index, DistortionMatrices, SpaceIndex};

pub use crate::model::MetricKind;

/// One measured cluster pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDistortionRecord {
    pub cluster_i: Arc<[u32]>,
    pub cluster_j: Arc<[u32]>,
    pub mu: f64,
    pub m: f64,
    pub w: f64,
    pub kind: MetricKind,
    pub iteration: usize,
}

/// Final scores with the number of cluster pairs behind each.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricScores {
    pub steadiness: f64,
    pub cohesiveness: f64,
    pub n_pairs_steadiness: usize,
    pub n_pairs_cohesiveness: usize,
    /// No extracted cluster ever split during Steadiness measurement.
    pub steadiness_no_pairs: bool,
    /// No extracted cluster ever split during Cohesiveness measurement.
    pub cohesiveness_no_pairs: bool,
}

/// Signed part of `δh - δl` that the metric of `kind` penalizes.
#[inline]
pub fn signed_distortion(delta_high: f64, delta_low: f64, kind: MetricKind) -> f64 {
    let d = match kind {
        MetricKind::Steadiness => delta_high - delta_low,
        MetricKind::Cohesiveness => delta_low - delta_high,
    };
    d.max(0.0)
}

/// Min-max normalization of `mu` clamped to `[0, 1]`; a degenerate range
/// (no distortion of that sign anywhere) yields 0.
#[inline]
pub fn normalized_distortion(mu: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((mu - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Prepared per-space structures shared by every iteration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub high: SpaceIndex,
    pub low: SpaceIndex,
    pub distortion: DistortionMatrices,
}

impl Prepared {
    pub fn new(embedding: &PairedEmbedding, config: &MetricConfig) -> Result<Self> {
        config.validate(embedding.n_points())?;
        let high = build_space_index(embedding.original(), config)?;
        let low = build_space_index(embedding.projected(), config)?;
        let distortion = build_distortion_matrices(&high, &low)?;
        Ok(Self { high, low, distortion })
    }
}

/// Measures one cluster pair. Inputs must be disjoint and nonempty.
pub fn partial_distortion_pair(
    ci: &[u32],
    cj: &[u32],
    embedding: &PairedEmbedding,
    prepared: &Prepared,
    kind: MetricKind,
    iteration: usize,
) -> Result<PartialDistortionRecord> {
    let delta_high = crate::cluster::cluster_pair_distance(ci, cj, &prepared.high, embedding.original())?;
    let delta_low = crate::cluster::cluster_pair_distance(ci, cj, &prepared.low, embedding.projected())?;
    Ok(make_record(Arc::from(ci), Arc::from(cj), delta_high, delta_low, &prepared.distortion, kind, iteration))
}

fn make_record(
    cluster_i: Arc<[u32]>,
    cluster_j: Arc<[u32]>,
    delta_high: f64,
    delta_low: f64,
    dm: &DistortionMatrices,
    kind: MetricKind,
    iteration: usize,
) -> PartialDistortionRecord {
    let mu = signed_distortion(delta_high, delta_low, kind);
    let (min, max) = match kind {
        MetricKind::Steadiness => (dm.min_plus, dm.max_plus),
        MetricKind::Cohesiveness => (dm.min_minus, dm.max_minus),
    };
    let w = (cluster_i.len() * cluster_j.len()) as f64;
    PartialDistortionRecord { m: normalized_distortion(mu, min, max), mu, w, kind, iteration, cluster_i, cluster_j }
}

/// What happened during one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationSummary {
    pub seed_id: u32,
    pub extracted_size: usize,
    pub n_clusters: usize,
    pub n_records: usize,
}

/// Runs one extraction + opposite-space clustering and measures every
/// unordered pair of the resulting groups. With
/// `include_zero_sign_pairs == false`, pairs with `μ = 0` are dropped.
pub fn run_iteration<R: Rng + ?Sized>(
    embedding: &PairedEmbedding,
    prepared: &Prepared,
    kind: MetricKind,
    rng: &mut R,
    config: &MetricConfig,
    iteration: usize,
) -> Result<(Vec<PartialDistortionRecord>, IterationSummary)> {
    let n = embedding.n_points();
    let (source, source_space, opposite, opposite_coords, target_space) = match kind {
        MetricKind::Steadiness => {
            (&prepared.low, Space::Projected, &prepared.high, embedding.original(), Space::Original)
        }
        MetricKind::Cohesiveness => {
            (&prepared.high, Space::Original, &prepared.low, embedding.projected(), Space::Projected)
        }
    };
    let seed_id = rng.random_range(0..n);
    let cluster = extract_cluster(source, seed_id, rng, config, source_space)?;
    let partition = cluster_in_opposite_space(
        &cluster.member_ids,
        opposite,
        config.clustering,
        opposite_coords,
        rng,
        target_space,
    )?;
    let groups: Vec<Arc<[u32]>> = partition.clusters.into_iter().map(Arc::from).collect();
    let mut records = Vec::with_capacity(groups.len() * groups.len().saturating_sub(1) / 2);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let delta_high = pair_distance_unchecked(&groups[i], &groups[j], &prepared.high, embedding.original());
            let delta_low = pair_distance_unchecked(&groups[i], &groups[j], &prepared.low, embedding.projected());
            let rec = make_record(
                groups[i].clone(),
                groups[j].clone(),
                delta_high,
                delta_low,
                &prepared.distortion,
                kind,
                iteration,
            );
            if config.include_zero_sign_pairs || rec.mu > 0.0 {
                records.push(rec);
            }
        }
    }
    let summary = IterationSummary {
        seed_id: seed_id as u32,
        extracted_size: cluster.member_ids.len(),
        n_clusters: groups.len(),
        n_records: records.len(),
    };
    Ok((records, summary))
}

/// Running `Σ w·m`, `Σ w` and pair count. Sums are taken per iteration and
/// then across iterations in order, so streamed and stored records agree
/// bit for bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    num: f64,
    den: f64,
    pairs: usize,
}

impl Tally {
    fn of_iteration(records: &[PartialDistortionRecord]) -> Self {
        records.iter().fold(Self::default(), |t, r| Self {
            num: t.num + r.w * r.m,
            den: t.den + r.w,
            pairs: t.pairs + 1,
        })
    }

    fn merge(self, other: Self) -> Self {
        Self { num: self.num + other.num, den: self.den + other.den, pairs: self.pairs + other.pairs }
    }

    fn of_records(records: &[PartialDistortionRecord]) -> Self {
        records
            .chunk_by(|a, b| a.iteration == b.iteration)
            .map(Self::of_iteration)
            .fold(Self::default(), Self::merge)
    }

    /// `1 - Σ w·m / Σ w`, or `None` when there is nothing to average.
    fn score(self) -> Option<f64> {
        (self.den > 0.0).then(|| 1.0 - self.num / self.den)
    }
}

fn scores_from(compress: Tally, stretch: Tally) -> MetricScores {
    let st = compress.score();
    let co = stretch.score();
    MetricScores {
        steadiness: st.unwrap_or(1.0),
        cohesiveness: co.unwrap_or(1.0),
        n_pairs_steadiness: compress.pairs,
        n_pairs_cohesiveness: stretch.pairs,
        steadiness_no_pairs: st.is_none(),
        cohesiveness_no_pairs: co.is_none(),
    }
}

/// Weighted aggregation into the two scores. An empty record list scores 1
/// and raises the matching `*_no_pairs` flag.
pub fn aggregate(records_compress: &[PartialDistortionRecord], records_stretch: &[PartialDistortionRecord]) -> MetricScores {
    scores_from(Tally::of_records(records_compress), Tally::of_records(records_stretch))
}

/// Per-point distortion aggregated from partial distortions.
///
/// Each record registers every point of `Cj` to every point of `Ci` (and
/// back) with strength `m·w`. Repeated registrations of the same point are
/// averaged, and a point's distortion is the sum of its averaged strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseDistortionField {
    /// Compression channel (Steadiness, False Groups).
    pub steadiness: Vec<f64>,
    /// Stretch channel (Cohesiveness, Missing Groups).
    pub cohesiveness: Vec<f64>,
    /// `A(p)` sets of the compression channel, sorted by target id.
    pub steadiness_registration: Vec<Vec<(u32, f64)>>,
    /// `A(p)` sets of the stretch channel, sorted by target id.
    pub cohesiveness_registration: Vec<Vec<(u32, f64)>>,
    /// Registration events per channel before averaging.
    pub registration_events: [u64; 2],
}

impl PointwiseDistortionField {
    pub fn zeros(n: usize) -> Self {
        Self {
            steadiness: vec![0.0; n],
            cohesiveness: vec![0.0; n],
            steadiness_registration: vec![Vec::new(); n],
            cohesiveness_registration: vec![Vec::new(); n],
            registration_events: [0, 0],
        }
    }

    pub fn n_points(&self) -> usize {
        self.steadiness.len()
    }
}

// dense accumulation costs 12·N² bytes per channel
const DENSE_LIMIT: usize = 2048;

enum Registry {
    Dense { n: usize, sum: Vec<f64>, count: Vec<u32> },
    Sparse(Vec<BTreeMap<u32, (f64, u32)>>),
}

impl Registry {
    fn new(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            Registry::Dense { n, sum: vec![0.0; n * n], count: vec![0; n * n] }
        } else {
            Registry::Sparse(vec![BTreeMap::new(); n])
        }
    }

    #[inline]
    fn add(&mut self, q: u32, p: u32, s: f64) {
        match self {
            Registry::Dense { n, sum, count } => {
                let at = q as usize * *n + p as usize;
                sum[at] += s;
                count[at] += 1;
            }
            Registry::Sparse(maps) => {
                let e = maps[q as usize].entry(p).or_insert((0.0, 0));
                e.0 += s;
                e.1 += 1;
            }
        }
    }

    fn finish(self, n: usize) -> (Vec<f64>, Vec<Vec<(u32, f64)>>) {
        let mut totals = vec![0.0; n];
        let mut lists = vec![Vec::new(); n];
        match self {
            Registry::Dense { sum, count, .. } => {
                for q in 0..n {
                    for p in 0..n {
                        let c = count[q * n + p];
                        if c > 0 {
                            lists[q].push((p as u32, sum[q * n + p] / f64::from(c)));
                        }
                    }
                }
            }
            Registry::Sparse(maps) => {
                for (q, map) in maps.into_iter().enumerate() {
                    lists[q] = map.into_iter().map(|(p, (s, c))| (p, s / f64::from(c))).collect();
                }
            }
        }
        for (t, list) in totals.iter_mut().zip(&lists) {
            *t = list.iter().map(|&(_, s)| s).sum();
        }
        (totals, lists)
    }
}

/// Builds the pointwise distortion field of `n` points from records of
/// both kinds.
pub fn accumulate_pointwise<'a, I>(records: I, n: usize) -> PointwiseDistortionField
where
    I: IntoIterator<Item = &'a PartialDistortionRecord>,
{
    let mut regs = [Registry::new(n), Registry::new(n)];
    let mut events = [0u64; 2];
    for r in records {
        let ch = match r.kind {
            MetricKind::Steadiness => 0,
            MetricKind::Cohesiveness => 1,
        };
        let s = r.m * r.w;
        let reg = &mut regs[ch];
        for &q in r.cluster_i.iter() {
            for &p in r.cluster_j.iter() {
                reg.add(q, p, s);
                reg.add(p, q, s);
            }
        }
        events[ch] += 2 * (r.cluster_i.len() * r.cluster_j.len()) as u64;
    }
    let [st, co] = regs;
    let (steadiness, steadiness_registration) = st.finish(n);
    let (cohesiveness, cohesiveness_registration) = co.finish(n);
    PointwiseDistortionField {
        steadiness,
        cohesiveness,
        steadiness_registration,
        cohesiveness_registration,
        registration_events: events,
    }
}

/// Per-metric iteration log.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub steadiness_iterations: Vec<IterationSummary>,
    pub cohesiveness_iterations: Vec<IterationSummary>,
}

/// Records of both metrics plus the iteration log.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub compress: Vec<PartialDistortionRecord>,
    pub stretch: Vec<PartialDistortionRecord>,
    pub diagnostics: Diagnostics,
}

fn run_metric(
    embedding: &PairedEmbedding,
    prepared: &Prepared,
    kind: MetricKind,
    config: &MetricConfig,
) -> Result<(Vec<PartialDistortionRecord>, Vec<IterationSummary>)> {
    let outcomes = par::map_range(config.iterations, |it| -> Result<_> {
        let mut rng: RngStream = config.derive_stream(kind, it)?;
        run_iteration(embedding, prepared, kind, &mut rng, config, it)
    });
    let mut records = Vec::new();
    let mut summaries = Vec::with_capacity(config.iterations);
    for outcome in outcomes {
        let (recs, summary) = outcome?;
        records.extend(recs);
        summaries.push(summary);
    }
    Ok((records, summaries))
}

/// Runs `config.iterations` iterations of each metric on prepared indices.
pub fn measure(embedding: &PairedEmbedding, prepared: &Prepared, config: &MetricConfig) -> Result<Measurement> {
    if prepared.high.n_points() != embedding.n_points() {
        return Err(Error::SizeMismatch(prepared.high.n_points(), embedding.n_points()));
    }
    let (compress, st_log) = run_metric(embedding, prepared, MetricKind::Steadiness, config)?;
    let (stretch, co_log) = run_metric(embedding, prepared, MetricKind::Cohesiveness, config)?;
    Ok(Measurement {
        compress,
        stretch,
        diagnostics: Diagnostics { steadiness_iterations: st_log, cohesiveness_iterations: co_log },
    })
}

fn tally_metric(
    embedding: &PairedEmbedding,
    prepared: &Prepared,
    kind: MetricKind,
    config: &MetricConfig,
) -> Result<(Tally, Vec<IterationSummary>)> {
    let outcomes = par::map_range(config.iterations, |it| -> Result<_> {
        let mut rng: RngStream = config.derive_stream(kind, it)?;
        let (records, summary) = run_iteration(embedding, prepared, kind, &mut rng, config, it)?;
        Ok((Tally::of_iteration(&records), summary))
    });
    let mut total = Tally::default();
    let mut summaries = Vec::with_capacity(config.iterations);
    for outcome in outcomes {
        let (t, summary) = outcome?;
        total = total.merge(t);
        summaries.push(summary);
    }
    Ok((total, summaries))
}

/// Scores only. Records are folded as they are produced instead of kept,
/// and the pointwise field is skipped; the scores equal those of
/// [`compute_snc`].
pub fn compute_scores(embedding: &PairedEmbedding, config: &MetricConfig) -> Result<(MetricScores, Diagnostics)> {
    let prepared = Prepared::new(embedding, config)?;
    let (compress, st_log) = tally_metric(embedding, &prepared, MetricKind::Steadiness, config)?;
    let (stretch, co_log) = tally_metric(embedding, &prepared, MetricKind::Cohesiveness, config)?;
    let diagnostics = Diagnostics { steadiness_iterations: st_log, cohesiveness_iterations: co_log };
    Ok((scores_from(compress, stretch), diagnostics))
}

/// Result of [`compute_snc`].
#[derive(Debug, Clone)]
pub struct SncOutput {
    pub scores: MetricScores,
    pub field: PointwiseDistortionField,
    pub diagnostics: Diagnostics,
}

/// Steadiness, Cohesiveness and the pointwise distortion field of a
/// projection. Deterministic for a fixed configuration.
pub fn compute_snc(embedding: &PairedEmbedding, config: &MetricConfig) -> Result<SncOutput> {
    let prepared = Prepared::new(embedding, config)?;
    let m = measure(embedding, &prepared, config)?;
    let scores = aggregate(&m.compress, &m.stretch);
    let field = accumulate_pointwise(m.compress.iter().chain(&m.stretch), embedding.n_points());
    Ok(SncOutput { scores, field, diagnostics: m.diagnostics })
}
