//! Evaluation toolkit for real-time push-notification runs.
//!
//! Scores runs with Expected Gain, Normalized Cumulative Gain, Gain Minus
//! Pain and latency; restricts runs to the first, best or a random N pushes
//! per day; probes collection reusability; and generates synthetic
//! collections with known structure.

pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
pub mod reusability;
pub mod seeding;
pub mod strategies;
pub mod synth;

pub use error::{EvalError, ModelError};
pub use metrics::{evaluate_run, evaluate_runs, rank_runs, RankedRun};
pub use model::{
    Alpha, ClusterId, ClusterToken, Epoch, EpochMap, EvalConfig, GroundTruth, Mode, ProfileId, PushRecord, Run, RunTag,
    TweetId, Variant, Windowing,
};
pub use report::{MetricKey, ScoreReport};
