//! Paired-dataset representation, run configuration and random streams.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `N` points with original (`N×D`) and projected (`N×d`) coordinates.
///
/// Labels ride along for display; no metric reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedEmbedding {
    original: Matrix,
    projected: Matrix,
    labels: Option<Vec<i64>>,
}

impl PairedEmbedding {
    pub fn new(original: Matrix, projected: Matrix) -> Result<Self> {
        if original.rows() != projected.rows() {
            return Err(Error::RowCountMismatch {
                original: original.rows(),
                projected: projected.rows(),
            });
        }
        if original.rows() < 2 {
            return Err(Error::TooFewPoints(original.rows()));
        }
        if projected.cols() == 0 || original.cols() < projected.cols() {
            return Err(Error::DimensionOrder { high: original.cols(), low: projected.cols() });
        }
        for m in [&original, &projected] {
            if let Some((row, col)) = m.first_non_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
        Ok(Self { original, projected, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n_points() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} points",
                labels.len(),
                self.n_points()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.original.rows()
    }

    pub fn original(&self) -> &Matrix {
        &self.original
    }

    pub fn projected(&self) -> &Matrix {
        &self.projected
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Exchanges the two spaces. Only valid when both have the same
    /// dimension, since the original space may not be narrower.
    pub fn swapped(&self) -> Result<Self> {
        let mut out = Self::new(self.projected.clone(), self.original.clone())?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

/// Which metric a measurement belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MetricKind {
    /// Extract in the projection, cluster in the original space, penalize
    /// compression (False Groups).
    Steadiness,
    /// Extract in the original space, cluster in the projection, penalize
    /// stretching (Missing Groups).
    Cohesiveness,
}

impl MetricKind {
    fn lane(self) -> u64 {
        match self {
            MetricKind::Steadiness => 0,
            MetricKind::Cohesiveness => 1,
        }
    }
}

/// The `clustering` function used to disperse an extracted cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClusteringChoice {
    /// HDBSCAN over the opposite space's distance matrix.
    #[default]
    HdbscanSnn,
    /// Lloyd's K-Means on raw opposite-space coordinates.
    KMeans(usize),
    /// K-Means with the number of clusters chosen by BIC in `2..=20`.
    XMeans,
}

impl fmt::Display for ClusteringChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusteringChoice::HdbscanSnn => f.write_str("hdbscan"),
            ClusteringChoice::KMeans(k) => write!(f, "kmeans:{k}"),
            ClusteringChoice::XMeans => f.write_str("xmeans"),
        }
    }
}

impl FromStr for ClusteringChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hdbscan" | "hdbscan_snn" => Ok(Self::HdbscanSnn),
            "xmeans" => Ok(Self::XMeans),
            _ => {
                let k = s
                    .strip_prefix("kmeans:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!(
                            "unknown clustering '{s}' (expected hdbscan, kmeans:K or xmeans)"
                        ))
                    })?;
                Ok(Self::KMeans(k))
            }
        }
    }
}

/// Point distance `dist` (and the matching cluster distance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DistanceChoice {
    /// Reciprocal-transformed shared-nearest-neighbor similarity; clusters
    /// compared by average linkage.
    #[default]
    Snn,
    /// Euclidean distance; clusters compared by centroid distance.
    Euclidean,
}

impl fmt::Display for DistanceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceChoice::Snn => "snn",
            DistanceChoice::Euclidean => "euclidean",
        })
    }
}

impl FromStr for DistanceChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snn" => Ok(Self::Snn),
            "euclidean" => Ok(Self::Euclidean),
            _ => Err(Error::InvalidConfig(format!(
                "unknown distance '{s}' (expected snn or euclidean)"
            ))),
        }
    }
}

/// How `extract_cluster` admits traversed neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExtractionChoice {
    /// Admit with probability equal to the normalized SNN similarity.
    #[default]
    Probabilistic,
    /// Admit every traversed neighbor.
    Deterministic,
}

impl fmt::Display for ExtractionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractionChoice::Probabilistic => "prob",
            ExtractionChoice::Deterministic => "det",
        })
    }
}

impl FromStr for ExtractionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" | "probabilistic" => Ok(Self::Probabilistic),
            "det" | "deterministic" => Ok(Self::Deterministic),
            _ => Err(Error::InvalidConfig(format!(
                "unknown extraction '{s}' (expected prob or det)"
            ))),
        }
    }
}

/// Parameters for one Steadiness/Cohesiveness run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricConfig {
    /// Neighborhood size of the SNN similarity.
    pub k_snn: usize,
    /// Cluster extractions per metric.
    pub iterations: usize,
    /// Offset of the reciprocal transform `1 / (sim + alpha)`.
    pub alpha: f64,
    /// Traversal budget of `extract_cluster` as a fraction of `N`.
    pub walk_ratio: f64,
    pub seed: u64,
    pub clustering: ClusteringChoice,
    pub distance: DistanceChoice,
    pub extraction: ExtractionChoice,
    /// Keep cluster pairs whose distortion has the other sign (as `m = 0`
    /// records) in the weighted average.
    pub include_zero_sign_pairs: bool,
    /// Exchange the Steadiness and Cohesiveness random streams.
    pub mirror_streams: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            k_snn: 100,
            iterations: 500,
            alpha: 0.1,
            walk_ratio: 0.4,
            seed: 0,
            clustering: ClusteringChoice::default(),
            distance: DistanceChoice::default(),
            extraction: ExtractionChoice::default(),
            include_zero_sign_pairs: true,
            mirror_streams: false,
        }
    }
}

impl MetricConfig {
    /// Checks the configuration against a dataset of `n_points` points.
    pub fn validate(&self, n_points: usize) -> Result<()> {
        if self.k_snn == 0 || self.k_snn >= n_points {
            return Err(Error::KOutOfRange { k: self.k_snn, n: n_points, requirement: "1 <= k < N" });
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig(String::from("iterations must be at least 1")));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.walk_ratio > 0.0 && self.walk_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "walk_ratio must lie in (0, 1], got {}",
                self.walk_ratio
            )));
        }
        if let ClusteringChoice::KMeans(0) = self.clustering {
            return Err(Error::InvalidConfig(String::from("kmeans needs K >= 1")));
        }
        Ok(())
    }

    /// Number of dequeue events an extraction may perform.
    pub fn walk_budget(&self, n_points: usize) -> usize {
        (crate::math::ceil(self.walk_ratio * n_points as f64) as usize).max(1)
    }

    /// Random stream for one iteration of one metric.
    pub fn derive_stream(&self, kind: MetricKind, iteration: usize) -> Result<RngStream> {
        if iteration >= self.iterations {
            return Err(Error::IterationOutOfRange { iteration, iterations: self.iterations });
        }
        let lane = kind.lane() ^ u64::from(self.mirror_streams);
        Ok(RngStream::new(self.seed, ((iteration as u64) << 1) | lane))
    }

    /// Same settings with the stream assignment of the two metrics exchanged.
    pub fn mirrored(&self) -> Self {
        Self { mirror_streams: !self.mirror_streams, ..self.clone() }
    }
}

/// Deterministic random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id selecting an independent keystream,
/// so the same pair reproduces the same sequence on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
