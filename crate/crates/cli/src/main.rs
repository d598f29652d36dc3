use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvf_core::features::{FeatureSet, FEATURE_NAMES};
use cvf_core::pipeline::{
    emit_report, extract_all_with, ingest_manifest, run_experiment_with, synth_corpus, ExperimentConfig, ExtractConfig,
    FeatureMatrix, ReportFormat, Selection, SynthSpec,
};
use cvf_core::stats::select_features_with;
use cvf_core::vad::segment_voicing;
use cvf_core::{load_wav, Execution, PipelineConfig};
use thiserror::Error;

/// Rate enforced by `extract --rate-check`.
const CHECKED_RATE: u32 = 16_000;

#[derive(Debug, Parser)]
#[command(name = "cvf", version, about = "Speech features and SVM evaluation for verbal-fluency recordings")]
struct Cli {
    /// `key = value` file overriding the defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print every setting (defaults plus any --config overrides) and exit.
    #[arg(long)]
    print_config: bool,

    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the 80-feature matrix of every recording in a manifest.
    Extract(ExtractArgs),
    /// Rank features by one-way ANOVA and write the table.
    Select(SelectArgs),
    /// Cross-validate an SVM on a feature set, optionally after selection.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus and its manifest.
    Synth(SynthArgs),
    /// Print the voiced/unvoiced segments of one recording.
    Segments(SegmentsArgs),
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Reject recordings not sampled at 16 kHz.
    #[arg(long)]
    rate_check: bool,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Significance level; defaults to `select.alpha`.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Add the ANOVA-selected stage.
    #[arg(long)]
    select: bool,
    /// LF, LF+CFD or LF+CFD+PE.
    #[arg(long, default_value = "LF+CFD+PE")]
    feature_set: FeatureSet,
    /// Folds; defaults to `eval.k`.
    #[arg(long)]
    k: Option<usize>,
    /// Defaults to `eval.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; `.csv` selects CSV, anything else text.
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    /// Defaults to `eval.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentsArgs {
    #[arg(long, value_name = "WAV")]
    wav: PathBuf,
}

#[derive(Debug, Error)]
enum Failure {
    #[error(transparent)]
    Core(#[from] cvf_core::Error),
    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_io() => 2,
            Failure::Write { .. } => 2,
            _ => 1,
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| Failure::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg = PipelineConfig::from_file(path)?;
    }
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let command = cli
        .command
        .ok_or_else(|| Failure::Usage("no subcommand given (try --help)".into()))?;

    match command {
        Command::Extract(a) => {
            let corpus = ingest_manifest(&a.manifest)?;
            let ecfg = ExtractConfig {
                vad: cfg.vad.clone(),
                nld: cfg.nld.clone(),
                required_rate: a.rate_check.then_some(CHECKED_RATE),
            };
            let m = extract_all_with(&corpus, &ecfg, exec)?;
            m.save(&a.out)?;
            let counts: Vec<String> = corpus.counts().iter().map(|(l, n)| format!("{l} {n}")).collect();
            eprintln!("{} recordings ({}) -> {}", m.nrows(), counts.join(", "), a.out.display());
        }
        Command::Select(a) => {
            let alpha = a.alpha.unwrap_or(cfg.alpha);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Failure::Usage(format!("--alpha must be in (0, 1), got {alpha}")));
            }
            let m = FeatureMatrix::load(&a.features)?;
            let sel = select_features_with(m.view(), &m.labels, alpha, exec)?;
            write_file(&a.out, &sel.to_table(&FEATURE_NAMES))?;
            eprintln!(
                "{} of {} features with p < {alpha} -> {}",
                sel.retained.len(),
                FEATURE_NAMES.len(),
                a.out.display()
            );
        }
        Command::Evaluate(a) => {
            let m = FeatureMatrix::load(&a.features)?;
            let ecfg = ExperimentConfig {
                feature_set: a.feature_set,
                selection: if a.select { Selection::Anova } else { Selection::None },
                alpha: cfg.alpha,
                svm: cfg.svm.clone(),
                k: a.k.unwrap_or(cfg.k),
                seed: a.seed.unwrap_or(cfg.seed),
            };
            let outcome = run_experiment_with(&m, &ecfg, exec)?;
            let format = ReportFormat::from_path(&a.report);
            write_file(&a.report, &emit_report(std::slice::from_ref(&outcome), format))?;
            let mut summary = String::new();
            if let Some(r) = &outcome.full.report {
                let _ = write!(summary, "{}: accuracy {:.1}%", a.feature_set, r.accuracy);
            }
            if let Some(s) = &outcome.selected {
                match &s.stage.report {
                    Some(r) => {
                        let _ = write!(
                            summary,
                            ", {:.1}% with {} selected features",
                            r.accuracy,
                            s.stage.columns.len()
                        );
                    }
                    None => {
                        let _ = write!(summary, ", {}", s.stage.diagnostic.as_deref().unwrap_or("no selected stage"));
                    }
                }
            }
            eprintln!("{summary} -> {}", a.report.display());
        }
        Command::Synth(a) => {
            let spec = SynthSpec::from_file(&a.spec)?;
            let manifest = synth_corpus(&spec, a.seed.unwrap_or(cfg.seed), &a.out)?;
            println!("{}", manifest.display());
        }
        Command::Segments(a) => {
            let signal = load_wav(&a.wav)?;
            print!("{}", segment_voicing(&signal, &cfg.vad)?.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
