//! Two-stage evaluation: the full feature set, then the ANOVA-retained subset.

use super::corpus::ClassLabel;
use super::matrix::FeatureMatrix;
use crate::classify::{cross_validate_with, EvalReport, SvmConfig};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::par::Execution;
use crate::stats::{select_features_with, SelectionResult};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Selection {
    None,
    #[default]
    Anova,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub feature_set: FeatureSet,
    pub selection: Selection,
    pub alpha: f64,
    pub svm: SvmConfig,
    pub k: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            feature_set: FeatureSet::default(),
            selection: Selection::default(),
            alpha: 0.05,
            svm: SvmConfig::default(),
            k: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    /// Registry indices of the columns this stage evaluated.
    pub columns: Vec<usize>,
    pub report: Option<EvalReport>,
    /// Why no report was produced.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SelectedStage {
    pub stage: Stage,
    pub selection: SelectionResult,
    /// Percentage of the stage-1 columns dropped.
    pub reduction_pct: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub feature_set: FeatureSet,
    pub full: Stage,
    pub selected: Option<SelectedStage>,
}

fn evaluate(
    matrix: &FeatureMatrix,
    columns: Vec<usize>,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<Stage> {
    let x = matrix.columns(&columns);
    let mut report = cross_validate_with(x.view(), &matrix.labels, cfg.k, &cfg.svm, cfg.seed, exec)?.report;
    report.feature_set = cfg.feature_set.to_string();
    Ok(Stage {
        columns,
        report: Some(report),
        diagnostic: None,
    })
}

pub fn run_experiment(matrix: &FeatureMatrix, cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(matrix, cfg, Execution::default())
}

/// Selection sees every row, as the evaluation protocol selects once on the
/// whole corpus before cross-validating.
pub fn run_experiment_with(matrix: &FeatureMatrix, cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutcome> {
    for class in ClassLabel::ALL {
        if !matrix.labels.contains(&class) {
            return Err(Error::Degenerate(format!("class {class} has no rows")));
        }
    }
    let masked = cfg.feature_set.columns();
    let full = evaluate(matrix, masked.clone(), cfg, exec)?;
    let selected = match cfg.selection {
        Selection::None => None,
        Selection::Anova => {
            let x = matrix.columns(&masked);
            let selection = select_features_with(x.view(), &matrix.labels, cfg.alpha, exec)?;
            let retained: Vec<usize> = selection.retained.iter().map(|&j| masked[j]).collect();
            let reduction_pct = 100.0 * (1.0 - retained.len() as f64 / masked.len() as f64);
            let stage = if retained.is_empty() {
                Stage {
                    columns: retained,
                    report: None,
                    diagnostic: Some(format!("no feature reached p < {}, post-selection stage skipped", cfg.alpha)),
                }
            } else {
                evaluate(matrix, retained, cfg, exec)?
            };
            Some(SelectedStage {
                stage,
                selection,
                reduction_pct,
            })
        }
    };
    Ok(ExperimentOutcome {
        feature_set: cfg.feature_set,
        full,
        selected,
    })
}
