use rtseval::ingest::{
    emit_clusters, emit_epoch, emit_qrels, emit_run, parse_clusters, parse_epoch, parse_qrels, parse_run,
};
use rtseval::model::validate_ground_truth;
use rtseval::synth::{gen_corpus, gen_ground_truth, gen_run, system_population, Span, SynthSpec, SystemSpec};
use rtseval::{evaluate_run, evaluate_runs, EvalConfig, GroundTruth, MetricKey, Run, RunTag, Variant};

const EG1: MetricKey = MetricKey::Eg(Variant::One);

fn system(seed: u64, precision: f64, pushes: usize) -> SystemSpec {
    SystemSpec {
        seed,
        precision,
        verbosity: Span::fixed(pushes),
        latency: Span::new(0, 600),
        silence_respect: 1.0,
    }
}

fn config(spec: &SynthSpec) -> EvalConfig {
    EvalConfig::new(spec.windowing().unwrap())
}

#[test]
fn generated_ground_truth_is_valid_and_seeded() {
    let spec = SynthSpec::new(17);
    let gt = gen_ground_truth(&spec).unwrap();
    assert!(validate_ground_truth(&gt).is_empty());
    assert_eq!(gt.judged_profiles().len(), spec.profiles);
    assert_eq!(gt, gen_ground_truth(&spec).unwrap());
    assert_ne!(gt, gen_ground_truth(&SynthSpec::new(18)).unwrap());
}

#[test]
fn realized_silent_rate_matches_the_spec() {
    for seed in 0..5 {
        let spec = SynthSpec::new(seed);
        let gt = gen_ground_truth(&spec).unwrap();
        let report = evaluate_run(&Run::empty(RunTag::new("none").unwrap()), &gt, &config(&spec)).unwrap();
        let cells: Vec<_> = report.cells_of("none").collect();
        assert_eq!(cells.len(), spec.profiles * spec.windows);
        let silent = cells.iter().filter(|c| c.silent).count() as f64 / cells.len() as f64;
        assert!((silent - spec.silent_rate).abs() <= 0.1, "seed {seed}: {silent}");
    }
}

#[test]
fn a_perfect_quiet_system_scores_one() {
    let spec = SynthSpec::new(4);
    let gt = gen_ground_truth(&spec).unwrap();
    let cfg = config(&spec);
    let run = gen_run(&gt, &system(1, 1.0, 1), &cfg, RunTag::new("oracle").unwrap()).unwrap();
    let report = evaluate_run(&run, &gt, &cfg).unwrap();
    for cell in report.cells_of("oracle") {
        assert_eq!(cell.eg_1, 1.0, "{} window {}", cell.profile, cell.window);
    }
    assert_eq!(report.score("oracle", EG1), Some(1.0));
}

#[test]
fn restraint_beats_verbosity_at_equal_precision() {
    let spec = SynthSpec::new(9);
    let gt = gen_ground_truth(&spec).unwrap();
    let cfg = config(&spec);
    let terse = gen_run(&gt, &system(2, 0.8, 1), &cfg, RunTag::new("terse").unwrap()).unwrap();
    let loud = gen_run(&gt, &system(2, 0.8, 10), &cfg, RunTag::new("loud").unwrap()).unwrap();
    let report = evaluate_runs(&[terse, loud], &gt, &cfg).unwrap();
    assert!(report.score("terse", EG1).unwrap() > report.score("loud", EG1).unwrap());
}

#[test]
fn corpora_are_deterministic_and_cap_compliant() {
    let spec = SynthSpec {
        profiles: 6,
        windows: 4,
        ..SynthSpec::new(31)
    };
    let build = || gen_corpus(&spec, system_population(31, 5, 3, spec.window_seconds), 3).unwrap();
    let (a, b) = (build(), build());
    assert_eq!(a.gt, b.gt);
    assert_eq!(a.runs, b.runs);
    assert_eq!(a.manifest, b.manifest);
    let report = evaluate_runs(&a.runs, &a.gt, &a.config).unwrap();
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    for run in &a.runs {
        for p in run.pushes() {
            assert!(p.push_epoch >= a.gt.epochs.get(&p.tweet).unwrap());
        }
    }
}

#[test]
fn corpora_survive_a_trip_through_files() {
    let spec = SynthSpec {
        profiles: 5,
        windows: 3,
        ..SynthSpec::new(8)
    };
    let corpus = gen_corpus(&spec, system_population(8, 4, 10, spec.window_seconds), 10).unwrap();
    let (q, _) = parse_qrels(emit_qrels(&corpus.gt.qrels).as_bytes(), "q").unwrap();
    let (c, _) = parse_clusters(emit_clusters(&corpus.gt.clusters).as_bytes(), "c").unwrap();
    let (e, _) = parse_epoch(emit_epoch(&corpus.gt.epochs).as_bytes(), "e").unwrap();
    let gt = GroundTruth::new(q, c, e);
    let runs: Vec<Run> = corpus
        .runs
        .iter()
        .map(|r| parse_run(emit_run(r).as_bytes(), "r", r.tag.clone()).unwrap().0)
        .collect();
    assert_eq!(runs, corpus.runs);
    let direct = evaluate_runs(&corpus.runs, &corpus.gt, &corpus.config).unwrap();
    let via_files = evaluate_runs(&runs, &gt, &corpus.config).unwrap();
    assert_eq!(direct, via_files);
}

#[test]
fn bad_specs_are_rejected() {
    let spec = SynthSpec {
        silent_rate: 1.5,
        ..SynthSpec::new(0)
    };
    assert!(gen_ground_truth(&spec).is_err());
    let spec = SynthSpec {
        tweets_per_cluster: Span::new(3, 1),
        ..SynthSpec::new(0)
    };
    assert!(gen_ground_truth(&spec).is_err());
    let ok = SynthSpec::new(0);
    let gt = gen_ground_truth(&ok).unwrap();
    let bad = SystemSpec {
        precision: -0.1,
        ..system(0, 0.5, 1)
    };
    assert!(gen_run(&gt, &bad, &config(&ok), RunTag::new("x").unwrap()).is_err());
}
