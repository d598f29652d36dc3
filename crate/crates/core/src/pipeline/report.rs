//! Rendering of experiment outcomes.

use std::fmt::Write as _;
use std::str::FromStr;

use super::experiment::{ExperimentOutcome, Stage};
use crate::classify::EvalReport;
use crate::features::FEATURE_NAMES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl ReportFormat {
    /// `.csv` gives CSV, anything else text.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Text,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format {s:?} (text or csv)")),
        }
    }
}

pub const CSV_COLUMNS: [&str; 28] = [
    "stage",
    "feature_set",
    "n_features",
    "reduction_pct",
    "k",
    "seed",
    "n",
    "class0",
    "class1",
    "cm_00",
    "cm_01",
    "cm_10",
    "cm_11",
    "cer_class0",
    "cer_class1",
    "cer_global",
    "accuracy",
    "coverage_95",
    "ci95_lo",
    "ci95_hi",
    "ci90_lo",
    "ci90_hi",
    "ci80_lo",
    "ci80_hi",
    "retained_features",
    "diagnostic",
    "coverage_method",
    "selection_alpha",
];

pub fn emit_report(outcomes: &[ExperimentOutcome], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(outcomes),
        ReportFormat::Csv => render_csv(outcomes),
    }
}

fn names(cols: &[usize]) -> Vec<&'static str> {
    cols.iter().map(|&c| FEATURE_NAMES[c]).collect()
}

fn render_text(outcomes: &[ExperimentOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let _ = writeln!(s, "== {} : all features ({}) ==", o.feature_set, o.full.columns.len());
        write_stage(&mut s, &o.full);
        if let Some(sel) = &o.selected {
            let _ = writeln!(
                s,
                "\n== {} : ANOVA-selected (alpha = {}) : {} of {} retained, reduction {:.1}% ==",
                o.feature_set,
                sel.selection.alpha,
                sel.stage.columns.len(),
                o.full.columns.len(),
                sel.reduction_pct
            );
            for &j in &sel.selection.retained {
                let t = &sel.selection.tests[j].anova;
                let _ = writeln!(s, "  {:<20} F = {:>12.4}  p = {:.3e}", FEATURE_NAMES[o.full.columns[j]], t.f, t.p);
            }
            write_stage(&mut s, &sel.stage);
        }
        s.push('\n');
    }
    s
}

fn write_stage(s: &mut String, stage: &Stage) {
    if let Some(r) = &stage.report {
        let _ = write!(s, "{r}");
    }
    if let Some(d) = &stage.diagnostic {
        let _ = writeln!(s, "diagnostic: {d}");
    }
}

fn render_csv(outcomes: &[ExperimentOutcome]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_COLUMNS).expect("in-memory write");
    for o in outcomes {
        let fs = o.feature_set.to_string();
        wtr.write_record(stage_row("full", &fs, &o.full, 0.0, None, ""))
            .expect("in-memory write");
        if let Some(sel) = &o.selected {
            let alpha = format!("{:.6}", sel.selection.alpha);
            wtr.write_record(stage_row("selected", &fs, &sel.stage, sel.reduction_pct, Some(&alpha), ";"))
                .expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn stage_row(name: &str, fs: &str, stage: &Stage, reduction: f64, alpha: Option<&str>, sep: &str) -> Vec<String> {
    let f = |v: f64| format!("{v:.6}");
    let mut row = vec![
        name.to_string(),
        fs.to_string(),
        stage.columns.len().to_string(),
        f(reduction),
    ];
    match &stage.report {
        Some(r) => row.extend(metric_fields(r)),
        None => row.extend(std::iter::repeat_n(String::new(), 20)),
    }
    row.push(if sep.is_empty() { String::new() } else { names(&stage.columns).join(sep) });
    row.push(stage.diagnostic.clone().unwrap_or_default());
    row.push("logistic(2*margin) approximation".into());
    row.push(alpha.unwrap_or("").to_string());
    row
}

fn metric_fields(r: &EvalReport) -> Vec<String> {
    let f = |v: f64| format!("{v:.6}");
    let mut out = vec![
        r.k.to_string(),
        r.seed.to_string(),
        r.n().to_string(),
        r.class_names[0].clone(),
        r.class_names[1].clone(),
    ];
    out.extend(r.confusion.iter().flatten().map(u64::to_string));
    out.extend([r.cer_per_class[0], r.cer_per_class[1], r.cer_global, r.accuracy, r.coverage].map(f));
    for iv in &r.intervals {
        out.push(f(iv.lo));
        out.push(f(iv.hi));
    }
    out
}
