//! Controlled experiments: a schedule of paired embeddings indexed by a
//! control value, scored by every metric over several neighborhood sizes and
//! seeds, then summarized by an OLS trend per metric.
//!
//! | experiment | control | what changes |
//! |---|---|---|
//! | A | disk pair angle, 60° → 0° | disks of distinct spheres overlap (False Groups) |
//! | B | half-disk angle, 30° → 0° | the two halves of each sphere merge (Missing Groups repaired) |
//! | C | replacement rate, 0 → 1 | projected points replaced by noise |
//! | D | UMAP-style `n_neighbors`, 4 → 90 | projection turns from local to global |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use snc_core::baselines::{Baseline, RankPair};
use snc_core::metrics::compute_scores;
use snc_core::synth;
use snc_core::{Matrix, MetricConfig, PairedEmbedding, RngStream};

use crate::io::{read_matrix, IoError};
use crate::regression::{ols, OlsFit, RegressionError};

/// Stream id reserved for dataset generation; metric streams stay far below.
pub const GENERATOR_STREAM: u64 = 1 << 62;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] snc_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{metric}: {source}")]
    Regression { metric: String, source: RegressionError },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    A,
    B,
    C,
    D,
}

impl ExperimentKind {
    pub fn control_name(self) -> &'static str {
        match self {
            ExperimentKind::A | ExperimentKind::B => "angle_deg",
            ExperimentKind::C => "replacement_rate",
            ExperimentKind::D => "n_neighbors",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ExperimentKind::A),
            "B" => Ok(ExperimentKind::B),
            "C" => Ok(ExperimentKind::C),
            "D" => Ok(ExperimentKind::D),
            _ => Err(format!("unknown experiment {s:?} (expected A, B, C or D)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Steadiness,
    Cohesiveness,
    #[serde(untagged)]
    Baseline(Baseline),
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Steadiness => "steadiness",
            Metric::Cohesiveness => "cohesiveness",
            Metric::Baseline(b) => b.name(),
        }
    }

    /// Steadiness, Cohesiveness, T&C and both MRREs.
    pub fn standard_set() -> Vec<Metric> {
        let mut v = vec![Metric::Steadiness, Metric::Cohesiveness];
        v.extend(
            [Baseline::Trustworthiness, Baseline::Continuity, Baseline::MrreMissing, Baseline::MrreFalse]
                .map(Metric::Baseline),
        );
        v
    }

    /// Parses a comma list of `snc`, `tnc`, `mrre`, `lcmc` or single metric names.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<Metric>, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let add: Vec<Metric> = match item {
                "snc" => vec![Metric::Steadiness, Metric::Cohesiveness],
                "steadiness" => vec![Metric::Steadiness],
                "cohesiveness" => vec![Metric::Cohesiveness],
                "tnc" => vec![Metric::Baseline(Baseline::Trustworthiness), Metric::Baseline(Baseline::Continuity)],
                "mrre" => vec![Metric::Baseline(Baseline::MrreMissing), Metric::Baseline(Baseline::MrreFalse)],
                other => match Baseline::ALL.iter().find(|b| b.name() == other) {
                    Some(&b) => vec![Metric::Baseline(b)],
                    None => return Err(format!("unknown metric {other:?}")),
                },
            };
            for m in add {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        if out.is_empty() {
            return Err("empty metric list".into());
        }
        Ok(out)
    }
}

/// How an instance is built from a control value and a seed.
#[derive(Debug, Clone)]
pub enum Family {
    FalseGroups { points_per_sphere: usize },
    MissingGroups { points_per_sphere: usize },
    Replacement { base: PairedEmbedding },
    /// Synthetic stand-in for Experiment D over a seeded RGB cube.
    SyntheticGlobal { cube_points: usize, n_cells: usize },
    /// Externally produced projections of one original dataset, ordered by
    /// control value.
    Files { original: Matrix, projections: Vec<(f64, Matrix)> },
}

#[derive(Debug, Clone)]
pub struct Schedule {
    pub kind: ExperimentKind,
    pub controls: Vec<f64>,
    pub family: Family,
}

fn descending(from: f64, step: f64) -> Vec<f64> {
    let n = (from / step).round() as usize;
    (0..=n).map(|i| from - step * i as f64).collect()
}

impl Schedule {
    /// Experiment A at 60°, 50°, ..., 0°.
    pub fn experiment_a(points_per_sphere: usize) -> Self {
        Self {
            kind: ExperimentKind::A,
            controls: descending(60.0, 10.0),
            family: Family::FalseGroups { points_per_sphere },
        }
    }

    /// Experiment B at 30°, 28.75°, ..., 0°.
    pub fn experiment_b(points_per_sphere: usize) -> Self {
        Self {
            kind: ExperimentKind::B,
            controls: descending(30.0, 1.25),
            family: Family::MissingGroups { points_per_sphere },
        }
    }

    /// Experiment C at rates 0, 0.05, ..., 1 over `base`.
    pub fn experiment_c(base: PairedEmbedding) -> Self {
        Self {
            kind: ExperimentKind::C,
            controls: (0..=20).map(|i| i as f64 / 20.0).collect(),
            family: Family::Replacement { base },
        }
    }

    /// The default Experiment C base: 2,000 points in ten 20-D blobs.
    pub fn default_c_base(seed: u64) -> Result<PairedEmbedding> {
        Ok(synth::gaussian_mixture_base(2000, 10, 20, &mut RngStream::new(seed, GENERATOR_STREAM))?)
    }

    /// Experiment D over the synthetic projection family.
    pub fn experiment_d_synthetic(cube_points: usize) -> Self {
        Self {
            kind: ExperimentKind::D,
            controls: synth::experiment_d_neighbors().into_iter().map(|n| n as f64).collect(),
            family: Family::SyntheticGlobal { cube_points, n_cells: 40 },
        }
    }

    /// Experiment D from a directory holding `original.csv` and one
    /// projection per control value named `n<value>.csv` (e.g. `n4.csv`).
    pub fn experiment_d_files(dir: &Path) -> Result<Self> {
        let original = read_matrix(&dir.join("original.csv"))?;
        let mut projections = Vec::new();
        let entries = std::fs::read_dir(dir)
            .map_err(|source| IoError::File { path: PathBuf::from(dir), source })?;
        for entry in entries {
            let path = entry.map_err(|source| IoError::File { path: PathBuf::from(dir), source })?.path();
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let is_csv = path.extension().is_some_and(|e| e == "csv");
            if let (true, Some(Ok(n))) = (is_csv, stem.strip_prefix('n').map(str::parse::<f64>)) {
                projections.push((n, read_matrix(&path)?));
            }
        }
        if projections.len() < 3 {
            return Err(ExperimentError::Invalid(format!(
                "{}: need at least 3 projection files named n<value>.csv",
                dir.display()
            )));
        }
        projections.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            kind: ExperimentKind::D,
            controls: projections.iter().map(|p| p.0).collect(),
            family: Family::Files { original, projections },
        })
    }

    pub fn with_controls(mut self, controls: Vec<f64>) -> Self {
        self.controls = controls;
        self
    }

    /// Builds the instance at `control` for `seed`. Every control value of a
    /// seed uses the same generator stream, so only the control varies.
    pub fn instance(&self, control: f64, seed: u64) -> Result<PairedEmbedding> {
        let mut rng = RngStream::new(seed, GENERATOR_STREAM);
        let e = match &self.family {
            Family::FalseGroups { points_per_sphere } => {
                synth::gen_experiment_a(control, *points_per_sphere, &mut rng)?
            }
            Family::MissingGroups { points_per_sphere } => {
                synth::gen_experiment_b(control, *points_per_sphere, &mut rng)?
            }
            Family::Replacement { base } => synth::gen_experiment_c(base, control, &mut rng)?,
            Family::SyntheticGlobal { cube_points, n_cells } => {
                let cube = synth::gen_rgb_cube(*cube_points, &mut rng);
                let low = synth::gen_global_family(&cube, control.round() as usize, *n_cells, &mut rng)?;
                PairedEmbedding::new(cube, low)?
            }
            Family::Files { original, projections } => {
                let proj = projections
                    .iter()
                    .find(|p| p.0 == control)
                    .ok_or_else(|| ExperimentError::Invalid(format!("no projection for control {control}")))?;
                PairedEmbedding::new(original.clone(), proj.1.clone())?
            }
        };
        Ok(e)
    }

    fn check(&self) -> Result<()> {
        if self.controls.len() < 3 {
            return Err(ExperimentError::Invalid(format!(
                "schedule needs at least 3 instances, got {}",
                self.controls.len()
            )));
        }
        let ascending = self.controls.windows(2).all(|w| w[0] < w[1]);
        let descending = self.controls.windows(2).all(|w| w[0] > w[1]);
        if !(ascending || descending) {
            return Err(ExperimentError::Invalid("control values must be strictly monotone".into()));
        }
        Ok(())
    }
}

/// Neighborhood sizes, iterations, seeds and metrics of a schedule run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub snc_k: Vec<usize>,
    pub baseline_k: Vec<usize>,
    pub seeds: Vec<u64>,
    pub metrics: Vec<Metric>,
    /// Template for every Steadiness/Cohesiveness run; `k_snn` and `seed`
    /// are overwritten per run.
    pub config: MetricConfig,
}

impl RunSettings {
    /// k = 80..120 for Steadiness/Cohesiveness, k = 5..25 for the
    /// baselines, 500 iterations, seeds 0..5.
    pub fn standard() -> Self {
        Self {
            snc_k: vec![80, 90, 100, 110, 120],
            baseline_k: vec![5, 10, 15, 20, 25],
            seeds: (0..5).collect(),
            metrics: Metric::standard_set(),
            config: MetricConfig::default(),
        }
    }
}

/// One score: a metric at one neighborhood size on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub metric: Metric,
    pub control_value: f64,
    pub seed: u64,
    pub k: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub control_value: f64,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTrend {
    pub metric: Metric,
    pub fit: OlsFit,
    /// Mean ± sd over seeds of the per-instance score.
    pub by_control: Vec<ControlSummary>,
}

impl MetricTrend {
    pub fn mean_at(&self, control: f64) -> Option<f64> {
        self.by_control.iter().find(|c| c.control_value == control).map(|c| c.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub experiment: ExperimentKind,
    pub control: String,
    pub settings: RunSettings,
    pub trends: Vec<MetricTrend>,
}

impl RegressionReport {
    pub fn trend(&self, metric: Metric) -> Option<&MetricTrend> {
        self.trends.iter().find(|t| t.metric == metric)
    }
}

fn score_instance(e: &PairedEmbedding, control: f64, seed: u64, settings: &RunSettings) -> Result<Vec<ScoreRow>> {
    let mut rows = Vec::new();
    let wants = |m: Metric| settings.metrics.contains(&m);
    if wants(Metric::Steadiness) || wants(Metric::Cohesiveness) {
        for &k in &settings.snc_k {
            let config = MetricConfig { k_snn: k, seed, ..settings.config.clone() };
            let (s, _) = compute_scores(e, &config)?;
            for (m, score) in [(Metric::Steadiness, s.steadiness), (Metric::Cohesiveness, s.cohesiveness)] {
                if wants(m) {
                    rows.push(ScoreRow { metric: m, control_value: control, seed, k, score });
                }
            }
        }
    }
    let baselines: Vec<Baseline> = settings
        .metrics
        .iter()
        .filter_map(|m| if let Metric::Baseline(b) = m { Some(*b) } else { None })
        .collect();
    if !baselines.is_empty() {
        let ranks = RankPair::new(e);
        for &b in &baselines {
            for &k in &settings.baseline_k {
                let score = b.evaluate(&ranks, k)?;
                rows.push(ScoreRow { metric: Metric::Baseline(b), control_value: control, seed, k, score });
            }
        }
    }
    Ok(rows)
}

/// Scores every (control, seed) instance and fits one trend per metric
/// against the per-instance mean over neighborhood sizes. Instances run in
/// parallel; rows come back in schedule order.
pub fn run_schedule(schedule: &Schedule, settings: &RunSettings) -> Result<(Vec<ScoreRow>, RegressionReport)> {
    schedule.check()?;
    if settings.seeds.is_empty() || settings.metrics.is_empty() {
        return Err(ExperimentError::Invalid("need at least one seed and one metric".into()));
    }
    let jobs: Vec<(f64, u64)> = schedule
        .controls
        .iter()
        .flat_map(|&c| settings.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let per_job: Vec<Vec<ScoreRow>> = jobs
        .par_iter()
        .map(|&(c, s)| score_instance(&schedule.instance(c, s)?, c, s, settings))
        .collect::<Result<_>>()?;
    let rows: Vec<ScoreRow> = per_job.into_iter().flatten().collect();
    let trends = settings
        .metrics
        .iter()
        .map(|&m| trend(m, &jobs, &rows))
        .collect::<Result<_>>()?;
    let report = RegressionReport {
        experiment: schedule.kind,
        control: schedule.kind.control_name().to_string(),
        settings: settings.clone(),
        trends,
    };
    Ok((rows, report))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn trend(metric: Metric, jobs: &[(f64, u64)], rows: &[ScoreRow]) -> Result<MetricTrend> {
    let mut xs = Vec::with_capacity(jobs.len());
    let mut ys = Vec::with_capacity(jobs.len());
    for &(c, s) in jobs {
        let scores: Vec<f64> = rows
            .iter()
            .filter(|r| r.metric == metric && r.control_value == c && r.seed == s)
            .map(|r| r.score)
            .collect();
        xs.push(c);
        ys.push(mean(&scores));
    }
    let fit = ols(&xs, &ys).map_err(|source| ExperimentError::Regression { metric: metric.name().into(), source })?;
    let mut controls: Vec<f64> = Vec::new();
    for &(c, _) in jobs {
        if !controls.contains(&c) {
            controls.push(c);
        }
    }
    let by_control = controls
        .into_iter()
        .map(|c| {
            let v: Vec<f64> = xs.iter().zip(&ys).filter(|(x, _)| **x == c).map(|(_, y)| *y).collect();
            let m = mean(&v);
            let sd = if v.len() > 1 {
                (v.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            ControlSummary { control_value: c, mean: m, sd, n: v.len() }
        })
        .collect();
    Ok(MetricTrend { metric, fit, by_control })
}

/// Writes the results table: `metric,control_value,seed,k,score`.
pub fn write_results_csv(path: &Path, rows: &[ScoreRow]) -> std::result::Result<(), IoError> {
    let err = |source| IoError::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["metric", "control_value", "seed", "k", "score"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.metric.name().to_string(),
            r.control_value.to_string(),
            r.seed.to_string(),
            r.k.to_string(),
            r.score.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|source| IoError::File { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_settings() -> RunSettings {
        RunSettings {
            snc_k: vec![5, 8],
            baseline_k: vec![3, 5],
            seeds: vec![1, 2],
            metrics: Metric::standard_set(),
            config: MetricConfig { iterations: 10, ..Default::default() },
        }
    }

    #[test]
    fn schedule_controls() {
        assert_eq!(Schedule::experiment_a(10).controls, vec![60.0, 50.0, 40.0, 30.0, 20.0, 10.0, 0.0]);
        let b = Schedule::experiment_b(10).controls;
        assert_eq!((b.len(), b[1], *b.last().unwrap()), (25, 28.75, 0.0));
        assert_eq!(Schedule::experiment_d_synthetic(10).controls.len(), 15);
    }

    #[test]
    fn report_is_well_formed_and_reproducible() {
        let s = Schedule::experiment_a(8).with_controls(vec![60.0, 30.0, 0.0]);
        let settings = tiny_settings();
        let (rows, report) = run_schedule(&s, &settings).unwrap();
        // 3 controls × 2 seeds × (2 snc metrics + 4 baselines) × 2 k
        assert_eq!(rows.len(), 3 * 2 * 6 * 2);
        assert_eq!(report.trends.len(), 6);
        for t in &report.trends {
            assert!((0.0..=1.0).contains(&t.fit.p_value));
            assert_eq!(t.by_control.len(), 3);
            assert!(t.by_control.iter().all(|c| c.n == 2));
        }
        let (rows2, report2) = run_schedule(&s, &settings).unwrap();
        assert_eq!(rows, rows2);
        assert_eq!(report, report2);
    }

    #[test]
    fn rejects_short_or_unordered_schedules() {
        let settings = tiny_settings();
        let short = Schedule::experiment_a(8).with_controls(vec![60.0, 0.0]);
        assert!(matches!(run_schedule(&short, &settings), Err(ExperimentError::Invalid(_))));
        let mixed = Schedule::experiment_a(8).with_controls(vec![60.0, 0.0, 30.0]);
        assert!(run_schedule(&mixed, &settings).is_err());
    }

    #[test]
    fn metric_lists() {
        assert_eq!(Metric::parse_list("snc").unwrap(), vec![Metric::Steadiness, Metric::Cohesiveness]);
        assert_eq!(Metric::parse_list("tnc,mrre,lcmc").unwrap().len(), 5);
        assert!(Metric::parse_list("stress").is_err());
        assert_eq!("b".parse::<ExperimentKind>().unwrap(), ExperimentKind::B);
    }

    #[test]
    fn file_schedule_reads_directory() {
        let dir = tempfile::tempdir().unwrap();
        let cube = synth::gen_rgb_cube(30, &mut RngStream::new(3, 0));
        crate::io::write_matrix(&dir.path().join("original.csv"), &cube).unwrap();
        for n in [10, 4, 20] {
            let low = synth::gen_global_family(&cube, n, 5, &mut RngStream::new(3, 1)).unwrap();
            crate::io::write_matrix(&dir.path().join(format!("n{n}.csv")), &low).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let s = Schedule::experiment_d_files(dir.path()).unwrap();
        assert_eq!(s.controls, vec![4.0, 10.0, 20.0]);
        let e = s.instance(10.0, 0).unwrap();
        assert_eq!(e.n_points(), 30);
    }
}
