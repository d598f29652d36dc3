mod common;

use cvf_core::features::{feature_index, FeatureSet, FEATURE_COUNT, FEATURE_NAMES};
use cvf_core::pipeline::*;
use cvf_core::signal::load_wav;
use cvf_core::stats::select_features;
use cvf_core::vad::{segment_voicing, SegmentKind, VadConfig};
use cvf_core::Execution;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn small_spec(duration_s: f64, count: usize) -> SynthSpec {
    let mut spec = SynthSpec {
        duration_s,
        ..SynthSpec::default()
    };
    for p in spec.classes.values_mut() {
        p.count = count;
    }
    spec
}

#[test]
fn vad_finds_the_synthesized_bursts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(60.0, 4);
    let manifest = synth_corpus(&spec, 5, dir.path()).unwrap();
    let corpus = ingest_manifest(&manifest).unwrap();
    let expected = spec.classes[&ClassLabel::Cr].bursts_for(60.0) as f64;
    for e in &corpus.entries {
        let map = segment_voicing(&load_wav(&e.path).unwrap(), &VadConfig::default()).unwrap();
        let found = map.of_kind(SegmentKind::Voiced).count() as f64;
        assert!((found - expected).abs() <= 0.1 * expected, "{}: {found} vs {expected}", e.subject_id);
    }
}

#[test]
fn clean_single_burst_is_one_segment() {
    let p = ClassParams {
        burst_rate_per_min: 20.0,
        noise_floor: 0.0,
        ..ClassParams::default()
    };
    assert_eq!(p.bursts_for(3.0), 1);
    for seed in 0..5 {
        let x = synth_recording(&p, 16_000, 3.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let map = segment_voicing(&common::signal(x), &VadConfig::default()).unwrap();
        assert_eq!(map.of_kind(SegmentKind::Voiced).count(), 1, "seed {seed}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let spec = small_spec(2.0, 3);
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synth_corpus(&spec, 77, a.path()).unwrap();
    synth_corpus(&spec, 77, b.path()).unwrap();
    synth_corpus(&spec, 78, c.path()).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    let mut differs = false;
    for n in &names {
        let x = std::fs::read(a.path().join(n)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(n)).unwrap(), "{n:?}");
        differs |= x != std::fs::read(c.path().join(n)).unwrap();
    }
    assert!(differs);
}

#[test]
fn extraction_is_repeatable_and_mode_independent() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(&small_spec(4.0, 3), 1, dir.path()).unwrap();
    let corpus = ingest_manifest(&manifest).unwrap();
    assert_eq!(corpus.counts().values().copied().collect::<Vec<_>>(), [3, 3]);
    let cfg = ExtractConfig::default();
    let a = extract_all_with(&corpus, &cfg, Execution::Sequential).unwrap();
    let b = extract_all_with(&corpus, &cfg, Execution::Parallel).unwrap();
    let c = extract_all(&corpus, &cfg).unwrap();
    assert_eq!(a.values.ncols(), FEATURE_COUNT);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_csv(), c.to_csv());
    assert_eq!(a.source_ids[0], "CR_000.wav");
    let back = FeatureMatrix::from_csv(&a.to_csv(), "mem").unwrap();
    assert_eq!(back.to_csv(), a.to_csv());
}

/// Bursty pauses show up in the unvoiced duration features, random phases in
/// the nonlinear block.
#[test]
fn injected_differences_point_the_right_way() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(30.0, 12);
    let cr = spec.classes.get_mut(&ClassLabel::Cr).unwrap();
    cr.pause_shape = 4.0;
    let mci = spec.classes.get_mut(&ClassLabel::Mci).unwrap();
    mci.pause_shape = 0.7;
    mci.phase = Phase::Random;
    let corpus = ingest_manifest(synth_corpus(&spec, 3, dir.path()).unwrap()).unwrap();
    let m = extract_all(&corpus, &ExtractConfig::default()).unwrap();
    let mean = |name: &str, label: ClassLabel| {
        let j = feature_index(name).unwrap();
        let rows: Vec<f64> = (0..m.nrows()).filter(|&i| m.labels[i] == label).map(|i| m.values[[i, j]]).collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    assert!(mean("unvoiced_dur_max", ClassLabel::Mci) > mean("unvoiced_dur_max", ClassLabel::Cr));

    let labels: Vec<&str> = m.labels.iter().map(|l| l.as_str()).collect();
    let sel = select_features(m.view(), &labels, 0.05).unwrap();
    let nonlinear_hits: Vec<&str> = (70..80).filter(|&j| sel.is_retained(j)).map(|j| FEATURE_NAMES[j]).collect();
    assert!(!nonlinear_hits.is_empty());
}

#[test]
fn pure_noise_features_are_mostly_discarded() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 100;
    let values = Array2::from_shape_fn((n, FEATURE_COUNT), |_| StandardNormal.sample(&mut rng));
    let labels = (0..n).map(|i| if i < 50 { ClassLabel::Cr } else { ClassLabel::Mci }).collect();
    let ids = (0..n).map(|i| format!("r{i}.wav")).collect();
    let m = FeatureMatrix::new(ids, labels, values).unwrap();
    let o = run_experiment(&m, &ExperimentConfig::default()).unwrap();
    let s = o.selected.unwrap();
    assert!(s.reduction_pct > 90.0, "{}", s.reduction_pct);
    if let Some(r) = &s.stage.report {
        assert!(r.accuracy < 80.0);
    }
}

#[test]
fn report_is_stable_and_well_formed() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 40;
    let values = Array2::from_shape_fn((n, FEATURE_COUNT), |(i, j)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z + if i >= 20 && j % 9 == 0 { 1.5 } else { 0.0 }
    });
    let labels = (0..n).map(|i| if i < 20 { ClassLabel::Cr } else { ClassLabel::Mci }).collect();
    let m = FeatureMatrix::new((0..n).map(|i| format!("r{i}")).collect(), labels, values).unwrap();
    let run = || {
        let outs: Vec<_> = FeatureSet::ALL
            .iter()
            .map(|&fs| {
                let cfg = ExperimentConfig { feature_set: fs, ..ExperimentConfig::default() };
                run_experiment(&m, &cfg).unwrap()
            })
            .collect();
        (emit_report(&outs, ReportFormat::Csv), emit_report(&outs, ReportFormat::Text))
    };
    let (csv_a, text_a) = run();
    let (csv_b, text_b) = run();
    assert_eq!(csv_a, csv_b);
    assert_eq!(text_a, text_b);
    let mut rdr = csv::Reader::from_reader(csv_a.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 28);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    let n_features: Vec<&str> = rows.iter().step_by(2).map(|r| &r[2]).collect();
    assert_eq!(n_features, ["70", "75", "80"]);
}

/// Classes that differ only in harmonic phase: the nonlinear columns carry
/// the separation.
#[test]
fn nonlinear_only_difference_favours_the_full_set() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs/nonlinear_only.spec");
    let spec = SynthSpec::from_file(path).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest_manifest(synth_corpus(&spec, 42, dir.path()).unwrap()).unwrap();
    let m = extract_all(&corpus, &ExtractConfig::default()).unwrap();
    let accuracy = |fs| {
        let cfg = ExperimentConfig {
            feature_set: fs,
            selection: Selection::None,
            ..ExperimentConfig::default()
        };
        run_experiment(&m, &cfg).unwrap().full.report.unwrap().accuracy
    };
    let (lf, all) = (accuracy(FeatureSet::Lf), accuracy(FeatureSet::LfCfdPe));
    eprintln!("LF {lf:.1}%, LF+CFD+PE {all:.1}%");
    assert!(all > lf, "LF {lf} vs LF+CFD+PE {all}");
}
