//! Feature-based time-series classification.
//!
//! The pipeline: parse labeled time series in UCR text format, compute a
//! catalog of interpretable scalar features per series, drop features that
//! produce special values anywhere on the dataset, run greedy forward
//! selection against a pooled-covariance linear discriminant, and score the
//! held-out split. Instance-based 1-NN baselines (Euclidean, full DTW,
//! Sakoe-Chiba banded DTW with a learned window) are included for
//! comparison.

pub mod baselines;
pub mod classifier;
pub mod error;
pub mod features;
pub mod ingest;
pub mod selection;
pub mod series;
pub mod stats;
pub mod value;

pub use error::Error;
pub use features::{
    CostClass, FeatureDescriptor, FeatureFamily, FeatureMatrix, MotifPattern,
};
pub use series::{Dataset, TimeSeries};
pub use value::{FeatureValue, SpecialKind};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
