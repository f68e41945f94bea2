//! Education-level difficulty classification for educational Q&A texts.
//!
//! A document is described by 46 static linguistic metrics (counts, readability
//! indices, word-sense statistics) and 63 yes/no questions answered by an LLM.
//! Either set, or both together, feed a three-class softmax regression that
//! predicts elementary, middle or high school level.
//!
//! The numeric core ([`classifier`], [`analysis`], [`static_metrics::readability`])
//! is generic over the floating point type through [`Scalar`]. The aliases at the
//! crate root fix it to `f64`, which is what the pipeline uses.

pub mod analysis;
pub mod baselines;
pub mod classifier;
pub mod dataset;
pub mod document;
pub mod error;
pub mod linguistics;
pub mod prompt_metrics;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod static_metrics;

pub use document::{EducationLevel, EduDocument};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Design matrix over `f64`.
pub type Matrix = classifier::DesignMatrix<f64>;
/// Trained softmax regression over `f64`.
pub type Model = classifier::DifficultyModel<f64>;
/// Training settings over `f64`.
pub type Hyperparams = classifier::Hyperparams<f64>;
/// Evaluation report over `f64`.
pub type Report = classifier::EvalReport<f64>;
/// Feature ranking over `f64`.
pub type Ranking = analysis::FRanking<f64>;
/// Bootstrap comparison outcome over `f64`.
pub type Bootstrap = analysis::BootstrapResult<f64>;
/// Readability indices over `f64`.
pub type Readability = static_metrics::readability::ReadabilityIndices<f64>;
/// Bootstrap settings over `f64`.
pub type BootstrapSettings = analysis::BootstrapConfig<f64>;
