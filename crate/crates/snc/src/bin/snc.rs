use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use snc::experiments::{run_schedule, write_results_csv, ExperimentKind, Metric, RunSettings, Schedule};
use snc::export::{export_reliability_map, DEFAULT_K_MAP};
use snc::{read_labels, read_matrix, selftest, threads, write_json, ScoresDocument};
use snc_core::baselines::RankPair;
use snc_core::{
    compute_snc, ClusteringChoice, DistanceChoice, ExtractionChoice, MetricConfig, PairedEmbedding,
};

/// Steadiness & Cohesiveness: inter-cluster reliability of projections.
#[derive(Parser)]
#[command(name = "snc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one projection and optionally export its reliability map.
    Compute(ComputeArgs),
    /// Rank-based baselines (T&C, MRREs, LCMC) of one projection.
    Baselines(BaselineArgs),
    /// Run a controlled experiment and fit per-metric trends.
    Experiment(ExperimentArgs),
    /// Check the metric pipeline against brute-force oracles.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Inputs {
    /// Original-space coordinates (CSV, one point per row).
    #[arg(long)]
    high: PathBuf,
    /// Projected coordinates (CSV, same row order).
    #[arg(long)]
    low: PathBuf,
}

impl Inputs {
    fn load(&self) -> Result<PairedEmbedding> {
        let high = read_matrix(&self.high)?;
        let low = read_matrix(&self.low)?;
        Ok(PairedEmbedding::new(high, low)?)
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Class labels (one per row), copied into the map.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    walk_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// hdbscan, kmeans:K or xmeans.
    #[arg(long, default_value = "hdbscan")]
    clustering: ClusteringChoice,
    /// snn or euclidean.
    #[arg(long, default_value = "snn")]
    distance: DistanceChoice,
    /// prob or det.
    #[arg(long, default_value = "prob")]
    extraction: ExtractionChoice,
    /// Drop cluster pairs whose distortion has the other sign.
    #[arg(long)]
    exclude_zero_sign_pairs: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the reliability map document.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K_MAP)]
    map_k: usize,
    /// Record wall-clock time in scores.json (the file is then no longer
    /// reproducible byte for byte).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, num_args = 1.., required = true)]
    k: Vec<usize>,
    /// Comma list of tnc, mrre, lcmc or single metric names.
    #[arg(long, default_value = "tnc,mrre,lcmc")]
    metrics: String,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// A, B, C or D.
    name: ExperimentKind,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Experiment D: directory with original.csv and n<value>.csv projections.
    /// Without it D runs on the synthetic family.
    #[arg(long)]
    projections: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Experiments A and B: points per sphere.
    #[arg(long, default_value_t = 500)]
    points_per_sphere: usize,
    /// Experiment D synthetic family: cube size.
    #[arg(long, default_value_t = 4000)]
    cube_points: usize,
    /// Experiment C: original coordinates of the base (defaults to the
    /// generated Gaussian mixture).
    #[arg(long, requires = "base_low")]
    base_high: Option<PathBuf>,
    #[arg(long, requires = "base_high")]
    base_low: Option<PathBuf>,
    /// Control values overriding the default schedule.
    #[arg(long, value_delimiter = ',')]
    controls: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "80,90,100,110,120")]
    snc_k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
    baseline_k: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value = "hdbscan")]
    clustering: ClusteringChoice,
    #[arg(long, default_value = "snn")]
    distance: DistanceChoice,
    #[arg(long, default_value = "snc,tnc,mrre")]
    metrics: String,
}

#[derive(Args)]
struct SelftestArgs {
    /// Random instances per oracle suite.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn compute(a: &ComputeArgs) -> Result<()> {
    let mut e = a.inputs.load()?;
    if let Some(path) = &a.labels {
        e = e.with_labels(read_labels(path)?).with_context(|| format!("{}", path.display()))?;
    }
    let config = MetricConfig {
        k_snn: a.k,
        iterations: a.iterations,
        alpha: a.alpha,
        walk_ratio: a.walk_ratio,
        seed: a.seed,
        clustering: a.clustering,
        distance: a.distance,
        extraction: a.extraction,
        include_zero_sign_pairs: !a.exclude_zero_sign_pairs,
        mirror_streams: false,
    };
    let start = Instant::now();
    let out = compute_snc(&e, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut doc = ScoresDocument::new(&out, &config);
    if a.timing {
        doc.elapsed_seconds = Some(elapsed);
    }
    write_json(&a.out, &doc)?;
    eprintln!(
        "steadiness {:.6}  cohesiveness {:.6}  ({} points, {elapsed:.2}s)",
        out.scores.steadiness,
        out.scores.cohesiveness,
        e.n_points()
    );
    if let Some(path) = &a.map {
        let map = export_reliability_map(&e, &out.field, &out.scores, &config, a.map_k)?;
        write_json(path, &map)?;
    }
    Ok(())
}

fn baselines(a: &BaselineArgs) -> Result<()> {
    let e = a.inputs.load()?;
    let metrics = Metric::parse_list(&a.metrics).map_err(anyhow::Error::msg)?;
    let ranks = RankPair::new(&e);
    let mut w = match &a.out {
        Some(path) => csv::Writer::from_writer(Box::new(fs::File::create(path)?) as Box<dyn std::io::Write>),
        None => csv::Writer::from_writer(Box::new(std::io::stdout()) as Box<dyn std::io::Write>),
    };
    w.write_record(["metric", "k", "score"])?;
    for m in metrics {
        let Metric::Baseline(b) = m else { bail!("{} is not a baseline metric", m.name()) };
        for &k in &a.k {
            let score = b.evaluate(&ranks, k)?;
            w.write_record([b.name().to_string(), k.to_string(), score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<()> {
    let schedule = match a.name {
        ExperimentKind::A => Schedule::experiment_a(a.points_per_sphere),
        ExperimentKind::B => Schedule::experiment_b(a.points_per_sphere),
        ExperimentKind::C => {
            let base = match (&a.base_high, &a.base_low) {
                (Some(h), Some(l)) => PairedEmbedding::new(read_matrix(h)?, read_matrix(l)?)?,
                _ => Schedule::default_c_base(0)?,
            };
            Schedule::experiment_c(base)
        }
        ExperimentKind::D => match &a.projections {
            Some(dir) => Schedule::experiment_d_files(dir)?,
            None => Schedule::experiment_d_synthetic(a.cube_points),
        },
    };
    if a.projections.is_some() && a.name != ExperimentKind::D {
        bail!("--projections only applies to experiment D");
    }
    let schedule = match &a.controls {
        Some(c) => schedule.with_controls(c.clone()),
        None => schedule,
    };
    let settings = RunSettings {
        snc_k: a.snc_k.clone(),
        baseline_k: a.baseline_k.clone(),
        seeds: (0..a.seeds).collect(),
        metrics: Metric::parse_list(&a.metrics).map_err(anyhow::Error::msg)?,
        config: MetricConfig {
            iterations: a.iterations,
            clustering: a.clustering,
            distance: a.distance,
            ..MetricConfig::default()
        },
    };
    fs::create_dir_all(&a.out).with_context(|| format!("{}", a.out.display()))?;
    let start = Instant::now();
    let (rows, report) = run_schedule(&schedule, &settings)?;
    write_results_csv(&a.out.join("results.csv"), &rows)?;
    write_json(&a.out.join("report.json"), &report)?;
    println!("experiment {} ({}), {:.1}s", a.name, report.control, start.elapsed().as_secs_f64());
    println!("{:<16} {:>12} {:>10}", "metric", "slope", "p");
    for t in &report.trends {
        println!("{:<16} {:>12.4e} {:>10.2e}", t.metric.name(), t.fit.slope, t.fit.p_value);
    }
    Ok(())
}

fn run_selftest(a: &SelftestArgs) -> Result<bool> {
    let checks = selftest::run_all(a.instances, a.seed);
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Compute(a) => compute(a).map(|_| true),
        Command::Baselines(a) => baselines(a).map(|_| true),
        Command::Experiment(a) => experiment(a).map(|_| true),
        Command::Selftest(a) => run_selftest(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    if let Err(msg) = threads::init_from_env() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

