//! Recording manifests.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Cr,
    Mci,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Cr, ClassLabel::Mci];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Cr => "CR",
            ClassLabel::Mci => "MCI",
        }
    }
}

impl AsRef<str> for ClassLabel {
    fn as_ref(&self) -> &str {
        self.as_str()
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "CR" => Ok(ClassLabel::Cr),
            "MCI" => Ok(ClassLabel::Mci),
            other => Err(format!("unknown label {other:?} (allowed: CR, MCI)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
    pub label: ClassLabel,
    pub subject_id: String,
}

impl CorpusEntry {
    pub fn source_id(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn counts(&self) -> BTreeMap<ClassLabel, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.label).or_insert(0) += 1;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }
}

pub const MANIFEST_HEADER: &str = "path,label,subject_id";

/// Reads a `path,label,subject_id` manifest. Relative paths are taken from
/// the manifest's directory; every listed file must exist and both classes
/// must be present.
pub fn ingest_manifest(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    match records.next() {
        Some(Ok(h)) if h.iter().collect::<Vec<_>>() == ["path", "label", "subject_id"] => {}
        _ => return Err(parse_err(1, format!("header must be `{MANIFEST_HEADER}`"))),
    }
    let mut seen = HashSet::new();
    let mut corpus = Corpus::default();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let [rel, label, subject] = [0, 1, 2].map(|i| rec.get(i).unwrap_or(""));
        if rec.len() != 3 || rel.is_empty() {
            return Err(parse_err(line, "expected `path,label,subject_id`".into()));
        }
        let label: ClassLabel = label.parse().map_err(|m| parse_err(line, m))?;
        if !seen.insert(rel.to_string()) {
            return Err(parse_err(line, format!("duplicate path {rel:?}")));
        }
        let full = base.join(rel);
        if !full.is_file() {
            return Err(Error::io(
                &full,
                std::io::Error::new(std::io::ErrorKind::NotFound, format!("listed on line {line} of {origin}")),
            ));
        }
        corpus.entries.push(CorpusEntry {
            path: full,
            label,
            subject_id: subject.to_string(),
        });
    }
    let counts = corpus.counts();
    if let Some(missing) = ClassLabel::ALL.iter().find(|c| !counts.contains_key(c)) {
        return Err(Error::Degenerate(format!("{origin}: class {missing} has no recordings")));
    }
    Ok(corpus)
}
