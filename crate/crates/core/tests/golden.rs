//! Hand-built collections whose scores were worked out by hand.

use rtseval::fixtures;
use rtseval::metrics::oracle::oracle_eval;
use rtseval::{evaluate_runs, Alpha, EvalError, MetricKey, Mode, ScoreReport, Variant};

const TOL: f64 = 1e-9;

fn eg(v: Variant) -> MetricKey {
    MetricKey::Eg(v)
}
fn ncg(v: Variant) -> MetricKey {
    MetricKey::Ncg(v)
}
fn gmp50() -> MetricKey {
    MetricKey::Gmp(Alpha::from_hundredths(50).unwrap())
}

fn check(report: &ScoreReport, run: &str, key: MetricKey, want: f64) {
    let got = report.score(run, key).unwrap();
    assert!((got - want).abs() < TOL, "{run} {key}: got {got}, want {want}");
}

fn score(f: &fixtures::Fixture) -> ScoreReport {
    let cfg = f.config();
    let report = evaluate_runs(&f.runs, &f.gt, &cfg).unwrap();
    let oracle = ScoreReport::merge(f.runs.iter().map(|r| oracle_eval(r, &f.gt, &cfg).unwrap()));
    assert!(report.approx_eq(&oracle, 1e-12));
    report
}

#[test]
fn redundant_is_punished_more_than_non_relevant() {
    let r = score(&fixtures::h1());
    for v in Variant::ALL {
        check(&r, "sysS1", eg(v), 0.25);
        check(&r, "sysS2", eg(v), 0.5);
        check(&r, "sysS1", ncg(v), 0.5);
        check(&r, "sysS2", ncg(v), 0.5);
    }
    check(&r, "sysS1", gmp50(), 0.0);
    check(&r, "sysS2", gmp50(), 0.0);
    check(&r, "sysS1", MetricKey::LatencyMean, 2.0);
    check(&r, "sysS2", MetricKey::LatencyMean, 2.0);
}

#[test]
fn pushes_on_a_silent_day_are_sent_back() {
    let r = score(&fixtures::h2());
    check(&r, "sysS1", eg(Variant::Zero), 0.5);
    check(&r, "sysS2", eg(Variant::Zero), 0.25);
    for v in [Variant::One, Variant::Proportional] {
        check(&r, "sysS1", eg(v), 1.0);
        check(&r, "sysS2", eg(v), 0.75);
        check(&r, "sysS1", ncg(v), 1.0);
        check(&r, "sysS2", ncg(v), 1.0);
    }
    check(&r, "sysS1", ncg(Variant::Zero), 0.5);
    check(&r, "sysS2", ncg(Variant::Zero), 0.5);
    check(&r, "sysS1", gmp50(), 0.25);
    check(&r, "sysS2", gmp50(), 0.0);
    let cell = r.cell("sysS2", fixtures::PROFILE, 1).unwrap();
    assert!(cell.silent);
    assert_eq!(cell.pushed, 0);
}

#[test]
fn five_window_example() {
    let r = score(&fixtures::worked_example());
    let third = 1.0 / 3.0;
    check(&r, "S1", eg(Variant::Zero), (third + third + 1.0) / 5.0);
    check(&r, "S1", eg(Variant::One), (third + third + 1.0) / 5.0);
    check(
        &r,
        "S1",
        eg(Variant::Proportional),
        (third + 0.9 + 0.9 + third + 1.0) / 5.0,
    );
    check(&r, "S2", eg(Variant::Zero), 0.6);
    check(&r, "S2", eg(Variant::One), 0.8);
    check(&r, "S2", eg(Variant::Proportional), 0.8);
    check(&r, "S1", ncg(Variant::Zero), 0.5);
    check(&r, "S1", ncg(Variant::One), 0.5);
    check(&r, "S1", ncg(Variant::Proportional), 0.86);
    check(&r, "S2", ncg(Variant::Zero), 0.5);
    check(&r, "S2", ncg(Variant::One), 0.7);
    check(&r, "S2", ncg(Variant::Proportional), 0.7);
    check(&r, "S2", gmp50(), 0.2);
    check(&r, "S1", MetricKey::LatencyMean, 32.0);
    check(&r, "S2", MetricKey::LatencyMean, 115.0);

    // S1 breaks the silence of windows 2 and 3 with one tweet each.
    for w in [1, 2] {
        let c = r.cell("S1", fixtures::PROFILE, w).unwrap();
        assert!(c.silent);
        assert!((c.eg_p - 0.9).abs() < TOL);
        assert_eq!(c.eg_1, 0.0);
    }
    // Window 1 is silent for S1 (C1 already retrieved) but not for S2.
    assert!(!r.cell("S2", fixtures::PROFILE, 1).unwrap().silent);
}

#[test]
fn over_cap_pushes_by_mode() {
    let f = fixtures::cap_overflow();
    let strict = evaluate_runs(&f.runs, &f.gt, &f.config()).unwrap();
    check(&strict, "verbose", eg(Variant::One), 1.0);
    let c = strict.cell("verbose", fixtures::PROFILE, 0).unwrap();
    assert_eq!((c.pushed, c.gain, c.z), (10, 10, 10));

    let cfg = f.config().with_mode(Mode::Official2016);
    let official = evaluate_runs(&f.runs, &f.gt, &cfg).unwrap();
    check(&official, "verbose", eg(Variant::One), 10.0 / 12.0);
    let o = oracle_eval(f.run("verbose"), &f.gt, &cfg).unwrap();
    assert!(official.approx_eq(&o, 1e-12));
}

#[test]
fn missing_epochs_by_mode() {
    let f = fixtures::epoch_gap();
    let gapped = f.run("gapped");
    let err = rtseval::evaluate_run(gapped, &f.gt, &f.config()).unwrap_err();
    match err {
        EvalError::MissingEpochs { tweets, .. } => {
            assert_eq!(tweets.len(), 1);
            assert_eq!(tweets[0].1.as_str(), "u1");
        }
        other => panic!("unexpected {other}"),
    }

    let official = rtseval::evaluate_run(gapped, &f.gt, &f.config().with_mode(Mode::Official2016)).unwrap();
    check(&official, "gapped", eg(Variant::One), 1.0);

    let mut complete = f.gt.clone();
    complete.epochs = f.stream_epochs.clone();
    let strict = rtseval::evaluate_run(gapped, &complete, &f.config()).unwrap();
    check(&strict, "gapped", eg(Variant::One), 0.5);
}
