//! Corpus handling, the evaluation protocol and reporting.

pub mod corpus;
pub mod experiment;
pub mod matrix;
pub mod report;
pub mod synth;

pub use corpus::{ingest_manifest, ClassLabel, Corpus, CorpusEntry};
pub use experiment::{run_experiment, run_experiment_with, ExperimentConfig, ExperimentOutcome, SelectedStage, Selection, Stage};
pub use matrix::{extract_all, extract_all_with, extract_signal, ExtractConfig, FeatureMatrix};
pub use report::{emit_report, ReportFormat};
pub use synth::{synth_corpus, synth_recording, ClassParams, Phase, SynthSpec};
