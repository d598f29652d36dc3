//! Binary SVM classification and its evaluation.

pub mod cv;
pub mod metrics;
pub mod svm;

pub use cv::{cross_validate, cross_validate_with, stratified_folds, CvOutcome};
pub use metrics::{confidence_interval, covered, margin_confidence, EvalReport, Interval, CI_LEVELS, COVERAGE_LEVEL};
pub use svm::{kkt_max_violation, train_smo, train_smo_full, Kernel, Prediction, Standardizer, SupportVector, SvmConfig, SvmModel, TrainedSvm};
