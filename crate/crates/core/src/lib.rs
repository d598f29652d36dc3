//! Speech-biomarker pipeline for verbal fluency recordings: voice activity
//! segmentation, an 80-feature linear and nonlinear description of each
//! recording, ANOVA feature selection and SVM evaluation with stratified
//! cross-validation.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod config;
pub mod error;
pub mod features;
pub mod par;
pub mod pipeline;
pub mod signal;
pub mod stats;
pub mod vad;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use par::Execution;
pub use signal::{load_wav, AudioSignal};
