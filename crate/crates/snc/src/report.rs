//! The `scores.json` document written by `snc compute`.

use serde::{Deserialize, Serialize};
use snc_core::metrics::{Diagnostics, IterationSummary};
use snc_core::{MetricConfig, SncOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iterations: usize,
    pub mean_extracted_size: f64,
    pub mean_clusters: f64,
    pub records: usize,
}

impl IterationStats {
    fn from_log(log: &[IterationSummary]) -> Self {
        let n = log.len().max(1) as f64;
        Self {
            iterations: log.len(),
            mean_extracted_size: log.iter().map(|s| s.extracted_size as f64).sum::<f64>() / n,
            mean_clusters: log.iter().map(|s| s.n_clusters as f64).sum::<f64>() / n,
            records: log.iter().map(|s| s.n_records).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub n_points: usize,
    pub n_pairs_steadiness: usize,
    pub n_pairs_cohesiveness: usize,
    pub steadiness_no_pairs: bool,
    pub cohesiveness_no_pairs: bool,
    pub steadiness: IterationStats,
    pub cohesiveness: IterationStats,
    /// Registration events of the pointwise field: [steadiness, cohesiveness].
    pub registration_events: [u64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresDocument {
    pub steadiness: f64,
    pub cohesiveness: f64,
    pub diagnostics: DiagnosticsSummary,
    pub config: MetricConfig,
    /// Wall-clock seconds; only present when asked for, since it breaks
    /// byte-for-byte reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl ScoresDocument {
    pub fn new(output: &SncOutput, config: &MetricConfig) -> Self {
        let Diagnostics { steadiness_iterations, cohesiveness_iterations } = &output.diagnostics;
        let s = &output.scores;
        Self {
            steadiness: s.steadiness,
            cohesiveness: s.cohesiveness,
            diagnostics: DiagnosticsSummary {
                n_points: output.field.n_points(),
                n_pairs_steadiness: s.n_pairs_steadiness,
                n_pairs_cohesiveness: s.n_pairs_cohesiveness,
                steadiness_no_pairs: s.steadiness_no_pairs,
                cohesiveness_no_pairs: s.cohesiveness_no_pairs,
                steadiness: IterationStats::from_log(steadiness_iterations),
                cohesiveness: IterationStats::from_log(cohesiveness_iterations),
                registration_events: output.field.registration_events,
            },
            config: config.clone(),
            elapsed_seconds: None,
        }
    }
}
