use traceineq::harness::{
    emit_report, run_suite, run_suite_with, search_counterexample, Execution, OutputFormat, SearchConfig,
    SearchSampling, SearchVerdict, SuiteConfig, SuiteReport,
};
use traceineq::sampler::SampleKind;

fn cfg(checks: &[&str], trials: usize) -> SuiteConfig {
    SuiteConfig {
        dims: vec![2, 3],
        trials,
        checks: checks.iter().map(|s| s.to_string()).collect(),
        ..SuiteConfig::default()
    }
}

fn emit(r: &SuiteReport, format: OutputFormat) -> String {
    let mut out = Vec::new();
    emit_report(r, format, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn empty_report_is_valid_json() {
    let r = run_suite(&cfg(&["all"], 0)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&emit(&r, OutputFormat::Json)).unwrap();
    assert_eq!(v["checks"], serde_json::json!([]));
}

#[test]
fn json_round_trips() {
    let r = run_suite(&cfg(&["monotone", "ricard", "conjecture"], 10)).unwrap();
    let back: SuiteReport = serde_json::from_str(&emit(&r, OutputFormat::Json)).unwrap();
    assert_eq!(back, r);

    let s = search_counterexample(&SearchConfig {
        dims: vec![2, 3],
        functions: vec!["power:0.5".into()],
        random_instances: 6,
        restarts: 1,
        steps: 3,
        ..SearchConfig::default()
    })
    .unwrap();
    let mut out = Vec::new();
    emit_report(&s, OutputFormat::Json, &mut out).unwrap();
    assert_eq!(serde_json::from_slice::<traceineq::harness::SearchReport>(&out).unwrap(), s);
}

#[test]
fn csv_rows_match_aggregates() {
    let r = run_suite(&cfg(&["convex"], 4)).unwrap();
    let text = emit(&r, OutputFormat::Csv);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 8);
    assert_eq!(rdr.records().count(), r.checks.len());
}

#[test]
fn text_summary_lists_every_aggregate() {
    let r = run_suite(&cfg(&["klein"], 4)).unwrap();
    let text = emit(&r, OutputFormat::Text);
    assert_eq!(text.lines().filter(|l| l.starts_with("klein")).count(), r.checks.len());
}

#[test]
fn serial_and_parallel_agree_on_every_pair_kind() {
    for kind in [SampleKind::Wishart, SampleKind::OrderedPair, SampleKind::ProjectionPair, SampleKind::RankDeficient { rank: 1 }] {
        let c = SuiteConfig {
            sample: kind,
            ..cfg(&["monotone", "convex", "powers_stormer", "zee_identity"], 8)
        };
        let mut a = run_suite_with(&c, Execution::Serial).unwrap();
        let mut b = run_suite_with(&c, Execution::Parallel).unwrap();
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(a, b);
    }
}

#[test]
fn aggregate_invariants() {
    let r = run_suite(&cfg(&["all"], 25)).unwrap();
    for c in &r.checks {
        assert!(c.violations <= c.trials);
        assert!(c.min_gap <= c.mean_gap, "{c:?}");
        let near_zero = c.min_relative_gap.abs() <= 10.0 * r.config.tolerance;
        assert_eq!(c.worst_instance.is_some(), c.violations > 0 || near_zero, "{c:?}");
    }
}

#[test]
fn commuting_search_finds_nothing() {
    let r = search_counterexample(&SearchConfig {
        dims: vec![2, 3, 4],
        functions: vec!["power:grid".into()],
        random_instances: 60,
        restarts: 6,
        steps: 20,
        sampling: SearchSampling::Commuting,
        ..SearchConfig::default()
    })
    .unwrap();
    assert_eq!(r.verdict, SearchVerdict::NoViolationFound);
    assert!(r.best_relative_gap >= -1e-9);
}

#[test]
fn different_seeds_differ() {
    let a = run_suite(&cfg(&["monotone"], 5)).unwrap();
    let b = run_suite(&SuiteConfig { seed: 43, ..cfg(&["monotone"], 5) }).unwrap();
    assert_ne!(a.checks, b.checks);
}
