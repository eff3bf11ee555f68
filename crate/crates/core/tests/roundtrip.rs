//! Writers and parsers agree.

use proptest::prelude::*;

use rtseval::fixtures::{self, random_instance};
use rtseval::ingest::{
    emit_clusters, emit_epoch, emit_qrels, emit_run, parse_clusters, parse_epoch, parse_qrels, parse_run,
    read_report_json, write_report, ReportFormat,
};
use rtseval::{evaluate_runs, GroundTruth};

fn reparse(gt: &GroundTruth) -> GroundTruth {
    let (q, d1) = parse_qrels(emit_qrels(&gt.qrels).as_bytes(), "q").unwrap();
    let (c, d2) = parse_clusters(emit_clusters(&gt.clusters).as_bytes(), "c").unwrap();
    let (e, d3) = parse_epoch(emit_epoch(&gt.epochs).as_bytes(), "e").unwrap();
    assert!(d1.is_empty() && d2.is_empty() && d3.is_empty());
    GroundTruth::new(q, c, e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ground_truth_and_runs_round_trip(seed in any::<u64>()) {
        let (f, _) = random_instance(seed, true);
        let back = reparse(&f.gt);
        prop_assert_eq!(&back.qrels.grades, &f.gt.qrels.grades);
        prop_assert_eq!(&back.clusters.assignments, &f.gt.clusters.assignments);
        prop_assert_eq!(&back.epochs, &f.gt.epochs);
        for run in &f.runs {
            let (parsed, diags) = parse_run(emit_run(run).as_bytes(), "r", run.tag.clone()).unwrap();
            prop_assert!(diags.is_empty());
            prop_assert_eq!(&parsed, run);
        }
    }

    #[test]
    fn json_report_round_trips(seed in any::<u64>()) {
        let (f, cfg) = random_instance(seed, false);
        let Ok(report) = evaluate_runs(&f.runs, &f.gt, &cfg) else { return Ok(()) };
        let json = write_report(&report, ReportFormat::Json);
        let back = read_report_json(&json).unwrap();
        prop_assert!(back.approx_eq(&report, 5e-7));
        prop_assert_eq!(write_report(&back, ReportFormat::Json), json);
    }
}

#[test]
fn tsv_report_layout() {
    let f = fixtures::h2();
    let report = evaluate_runs(&f.runs, &f.gt, &f.config()).unwrap();
    let tsv = write_report(&report, ReportFormat::Tsv);
    let mut lines = tsv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run\tprofile\twindow\tpushed\tgain\tZ\tpain\tsilent\tEG-0\tEG-1\tEG-p\tnCG-0\tnCG-1\tnCG-p\tGMP.33\tGMP.50\tGMP.66"
    );
    assert_eq!(
        lines.next().unwrap(),
        "sysS1\tRTS1\t0\t1\t1\t1\t0\t0\t1.000000\t1.000000\t1.000000\t1.000000\t1.000000\t1.000000\t0.330000\t0.500000\t0.660000"
    );
    assert!(tsv.contains("#aggregate\tEG-1\tsysS2\t0.750000\n"));
    assert!(tsv.contains("#latency\tsysS2\tRTS1\t2\t1\t0\n"));
}
