//! Inter-cluster reliability metrics for multidimensional projections.
//!
//! A projection maps `N` points from an original `D`-dimensional space to a
//! `d`-dimensional projected space. Local metrics such as trustworthiness
//! look at each point's neighbors; this crate measures how *groups* of
//! points survive the mapping:
//!
//! - **Steadiness** penalizes False Groups: clusters seen in the projection
//!   that are actually separated groups in the original space.
//! - **Cohesiveness** penalizes Missing Groups: original clusters that are
//!   torn apart in the projection.
//!
//! Both scores are computed by repeatedly extracting a random cluster in one
//! space, re-clustering its members in the opposite space, and measuring how
//! compressed or stretched the resulting cluster pairs are. The same run
//! yields a per-point distortion field used to draw a reliability map.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature enables
//! `std` and spreads row-wise construction and metric iterations over a
//! rayon pool without changing any result.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod cluster;
mod error;
pub mod knn;
mod math;
mod matrix;
pub mod metrics;
pub mod model;
mod par;
pub mod snn;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use metrics::{compute_snc, MetricKind, MetricScores, PointwiseDistortionField, SncOutput};
pub use model::{
    ClusteringChoice, DistanceChoice, ExtractionChoice, MetricConfig, PairedEmbedding, RngStream,
};
pub use snn::{DistortionMatrices, SpaceIndex};
