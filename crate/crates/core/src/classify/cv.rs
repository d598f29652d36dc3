//! Stratified k-fold cross-validation.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::EvalReport;
use super::svm::{binary_classes, train_smo, Prediction, SvmConfig};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::stats::group_rows;

/// Test-row indices of each fold. Within each class (sorted by name) rows
/// are shuffled and dealt round-robin; the dealing position carries over
/// from one class to the next so fold sizes differ by at most one.
pub fn stratified_folds<S: AsRef<str>>(labels: &[S], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let groups = group_rows(labels);
    if let Some((name, rows)) = groups.iter().find(|(_, rows)| rows.len() < k) {
        return Err(Error::Degenerate(format!(
            "class {name} has {} rows, fewer than k = {k}",
            rows.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for rows in groups.values() {
        let mut rows = rows.clone();
        rows.shuffle(&mut rng);
        for r in rows {
            folds[slot % k].push(r);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub folds: Vec<Vec<usize>>,
    /// Held-out prediction of every row, in input order.
    pub predictions: Vec<Prediction>,
}

pub fn cross_validate<S: AsRef<str> + Sync>(
    x: ArrayView2<'_, f64>,
    labels: &[S],
    k: usize,
    cfg: &SvmConfig,
    seed: u64,
) -> Result<EvalReport> {
    cross_validate_with(x, labels, k, cfg, seed, Execution::default()).map(|o| o.report)
}

/// Folds train independently (optionally in parallel, seed `seed + fold + 1`)
/// and are merged in fold order.
pub fn cross_validate_with<S: AsRef<str> + Sync>(
    x: ArrayView2<'_, f64>,
    labels: &[S],
    k: usize,
    cfg: &SvmConfig,
    seed: u64,
    exec: Execution,
) -> Result<CvOutcome> {
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: labels.len(),
        });
    }
    cfg.validate()?;
    let class_names = binary_classes(labels)?;
    let folds = stratified_folds(labels, k, seed)?;
    let n = x.nrows();

    let per_fold = par::map_range(exec, k, |f| -> Result<Vec<(usize, Prediction)>> {
        let test = &folds[f];
        let mut in_test = vec![false; n];
        for &i in test {
            in_test[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        let xt: Array2<f64> = x.select(Axis(0), &train);
        let yt: Vec<&str> = train.iter().map(|&i| labels[i].as_ref()).collect();
        let model = train_smo(xt.view(), &yt, cfg, seed.wrapping_add(f as u64 + 1))?;
        test.iter()
            .map(|&i| model.predict(x.row(i)).map(|p| (i, p)))
            .collect()
    });

    let mut predictions = vec![None; n];
    for fold in per_fold {
        for (i, p) in fold? {
            predictions[i] = Some(p);
        }
    }
    let predictions: Vec<Prediction> = predictions.into_iter().map(|p| p.expect("every row is tested once")).collect();
    let truth: Vec<usize> = labels
        .iter()
        .map(|l| usize::from(l.as_ref() == class_names[1]))
        .collect();
    let report = EvalReport::from_predictions(class_names, &truth, &predictions, k, seed)?;
    Ok(CvOutcome {
        report,
        folds,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<&str> = (0..53).map(|i| if i % 3 == 0 { "a" } else { "b" }).collect();
        let folds = stratified_folds(&labels, 10, 9).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..53).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for f in &folds {
            let a = f.iter().filter(|&&i| labels[i] == "a").count();
            assert!(a == 1 || a == 2, "fold has {a} of class a");
        }
    }

    #[test]
    fn small_class_is_rejected() {
        let labels = ["a", "a", "b", "b", "b"];
        assert!(matches!(stratified_folds(&labels, 3, 0), Err(Error::Degenerate(_))));
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }
}
