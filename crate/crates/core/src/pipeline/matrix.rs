//! Feature matrices: extraction over a corpus and CSV persistence.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};

use super::corpus::{ClassLabel, Corpus};
use crate::error::{Error, Result};
use crate::features::linear::{linear_block_with, LINEAR_COUNT};
use crate::features::{nld_block_with, NldConfig, FEATURE_COUNT, FEATURE_NAMES};
use crate::par::{self, Execution};
use crate::signal::{load_wav, AudioSignal};
use crate::vad::VadConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub source_ids: Vec<String>,
    pub labels: Vec<ClassLabel>,
    /// One row per recording, `FEATURE_COUNT` columns in registry order.
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(source_ids: Vec<String>, labels: Vec<ClassLabel>, values: Array2<f64>) -> Result<Self> {
        if values.ncols() != FEATURE_COUNT {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_COUNT,
                got: values.ncols(),
            });
        }
        for len in [source_ids.len(), labels.len()] {
            if len != values.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: values.nrows(),
                    got: len,
                });
            }
        }
        if let Some(((r, c), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "non-finite value in row {r}, column {}",
                FEATURE_NAMES[c]
            )));
        }
        Ok(Self {
            source_ids,
            labels,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn columns(&self, cols: &[usize]) -> Array2<f64> {
        self.values.select(Axis(1), cols)
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("ascii output")
    }

    /// Header `source_id,<feature names>,label`; values with 9 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["source_id"];
        header.extend_from_slice(&FEATURE_NAMES);
        header.push("label");
        wtr.write_record(&header)?;
        for (i, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = Vec::with_capacity(FEATURE_COUNT + 2);
            rec.push(self.source_ids[i].clone());
            rec.extend(row.iter().map(|v| format!("{v:.8e}")));
            rec.push(self.labels[i].to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let err = |line: u64, message: String| Error::Parse {
            path: origin.to_string(),
            line: line as usize,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = rdr.records();
        let header = match records.next() {
            Some(Ok(h)) => h,
            _ => return Err(err(1, "missing header".into())),
        };
        let expected: Vec<&str> = std::iter::once("source_id")
            .chain(FEATURE_NAMES.iter().copied())
            .chain(std::iter::once("label"))
            .collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(err(1, "header does not match the feature registry".into()));
        }
        let (mut ids, mut labels, mut flat) = (Vec::new(), Vec::new(), Vec::new());
        for rec in records {
            let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != FEATURE_COUNT + 2 {
                return Err(err(line, format!("expected {} fields, got {}", FEATURE_COUNT + 2, rec.len())));
            }
            ids.push(rec[0].to_string());
            for (j, field) in rec.iter().skip(1).take(FEATURE_COUNT).enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| err(line, format!("bad number {field:?} in column {}", FEATURE_NAMES[j])))?;
                if !v.is_finite() {
                    return Err(err(line, format!("non-finite value in column {}", FEATURE_NAMES[j])));
                }
                flat.push(v);
            }
            labels.push(rec[FEATURE_COUNT + 1].trim().parse::<ClassLabel>().map_err(|m| err(line, m))?);
        }
        let values = Array2::from_shape_vec((ids.len(), FEATURE_COUNT), flat).expect("row lengths checked");
        Self::new(ids, labels, values)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractConfig {
    pub vad: VadConfig,
    pub nld: NldConfig,
    /// Only accept recordings at this rate, when set.
    pub required_rate: Option<u32>,
}

/// The 80 registry features of one signal.
pub fn extract_signal(signal: &AudioSignal, cfg: &ExtractConfig, exec: Execution) -> Result<[f64; FEATURE_COUNT]> {
    let (linear, _) = linear_block_with(signal, &cfg.vad, exec)?;
    let nld = nld_block_with(signal, &cfg.nld, exec)?;
    let mut out = [0.0; FEATURE_COUNT];
    out[..LINEAR_COUNT].copy_from_slice(&linear.values);
    out[LINEAR_COUNT..].copy_from_slice(&nld.values);
    Ok(out)
}

pub fn extract_all(corpus: &Corpus, cfg: &ExtractConfig) -> Result<FeatureMatrix> {
    extract_all_with(corpus, cfg, Execution::default())
}

/// Rows come out in manifest order. Every failing recording is reported;
/// no matrix is produced unless all succeed.
pub fn extract_all_with(corpus: &Corpus, cfg: &ExtractConfig, exec: Execution) -> Result<FeatureMatrix> {
    cfg.vad.validate()?;
    cfg.nld.validate()?;
    let rows = par::map(exec, &corpus.entries, |entry| -> Result<[f64; FEATURE_COUNT]> {
        let signal = load_wav(&entry.path)?;
        if let Some(rate) = cfg.required_rate {
            if signal.sample_rate() != rate {
                return Err(Error::InvalidParameter(format!(
                    "sample rate {} Hz, expected {rate} Hz",
                    signal.sample_rate()
                )));
            }
        }
        extract_signal(&signal, cfg, Execution::Sequential)
    });
    let mut failures = Vec::new();
    let mut flat = Vec::with_capacity(rows.len() * FEATURE_COUNT);
    let mut any_io = false;
    for (entry, row) in corpus.entries.iter().zip(rows) {
        match row {
            Ok(r) => flat.extend_from_slice(&r),
            Err(e) => {
                any_io |= e.is_io();
                failures.push((entry.path.display().to_string(), e.to_string()));
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::Extraction { failures, any_io });
    }
    let values = Array2::from_shape_vec((corpus.len(), FEATURE_COUNT), flat).expect("fixed row width");
    FeatureMatrix::new(
        corpus.entries.iter().map(|e| e.source_id()).collect(),
        corpus.labels(),
        values,
    )
}
