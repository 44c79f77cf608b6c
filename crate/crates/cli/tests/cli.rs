use std::path::PathBuf;
use std::process::{Command, Output};

use greduce::gen::AlignmentStrategy;
use greduce::reduce::SearchKind;
use greduce_cli::{
    emit_report, parse_json, replay, run_campaign, CampaignConfig, CliError, LabelingFile, ReportFormat, SeedSpec,
    CSV_COLUMNS,
};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greduce")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.trace.json"))
}

#[test]
fn replay_fixture_reproduces_input() {
    let out = bin(&["replay", "--trace", fixture("password").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "abc\nabc\n");
}

#[test]
fn replay_with_labeling() {
    let dir = tempfile::tempdir().unwrap();
    let labeling = dir.path().join("l.json");
    std::fs::write(&labeling, serde_json::to_vec(&LabelingFile::new(vec![0, 1])).unwrap()).unwrap();
    let out = bin(&[
        "replay",
        "--trace",
        fixture("password").to_str().unwrap(),
        "--labeling",
        labeling.to_str().unwrap(),
        "--strategy",
        "halt",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "c\nc\n");
}

#[test]
fn replay_reports_events() {
    let bytes = std::fs::read(fixture("digraph")).unwrap();
    let out = replay(&bytes, Some(&LabelingFile::new(vec![0])), AlignmentStrategy::Halt, 0).unwrap();
    assert!(out.input.is_none());
    assert_eq!(out.events.len(), 1);
    assert!(out.events[0].contains("halted"), "{}", out.events[0]);
    let out = replay(&bytes, Some(&LabelingFile::new(vec![0])), AlignmentStrategy::Realign, 0).unwrap();
    assert!(out.input.is_some());
    assert!(!out.events.is_empty());
}

#[test]
fn corrupted_trace_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut bytes = std::fs::read(fixture("password")).unwrap();
    bytes.truncate(bytes.len() / 2);
    std::fs::write(&path, &bytes).unwrap();
    let out = bin(&["replay", "--trace", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("parse error at byte"));
}

#[test]
fn bad_labeling_and_unknown_case_are_config_errors() {
    let bytes = std::fs::read(fixture("password")).unwrap();
    let err = replay(&bytes, Some(&LabelingFile::new(vec![9])), AlignmentStrategy::Halt, 0).unwrap_err();
    assert!(matches!(err, CliError::Parse { .. }));
    let out = bin(&["run", "--case", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["run", "--case", "password", "--strategy", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_campaign_is_a_config_error() {
    assert!(matches!(run_campaign(&CampaignConfig::new(&[])), Err(CliError::Config(_))));
    let mut config = CampaignConfig::new(&["password"]);
    config.searches.clear();
    assert!(matches!(run_campaign(&config), Err(CliError::Config(_))));
    assert!(matches!(run_campaign(&CampaignConfig::new(&["pop-demo"])), Err(CliError::Config(_))));
}

#[test]
fn record_matches_shipped_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = bin(&["record", "--case", "nested", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(path).unwrap(), std::fs::read(fixture("nested")).unwrap());
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = bin(&[
        "run",
        "--case",
        "password",
        "--search",
        "tree",
        "--strategy",
        "realign",
        "--report",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let reports = parse_json(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].size_final, 4);
    assert_eq!(reports[0].final_input, "c\nc\n");
    assert!(reports[0].sound);

    let csv = dir.path().join("r.csv");
    let out = bin(&["run", "--case", "nested", "--format", "csv", "--report", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
}

fn campaign(jobs: usize) -> CampaignConfig {
    CampaignConfig {
        cases: vec!["all".into()],
        searches: vec![SearchKind::SequenceDdmin, SearchKind::TreeHdd],
        strategies: AlignmentStrategy::ALL.to_vec(),
        seeds: vec![SeedSpec::Fixture, SeedSpec::Bugs(2)],
        realign_seed: 3,
        timeout: None,
        jobs,
    }
}

#[test]
fn campaigns_are_deterministic_across_runs_and_jobs() {
    let strip = |jobs| {
        let reports: Vec<_> = run_campaign(&campaign(jobs)).unwrap().iter().map(|r| r.without_timing()).collect();
        (emit_report(&reports, ReportFormat::Json), emit_report(&reports, ReportFormat::Csv))
    };
    let a = strip(1);
    assert_eq!(a, strip(1));
    assert_eq!(a, strip(4));
}

#[test]
fn tree_needs_no_more_tests_than_sequence_on_digraph() {
    let mut config = CampaignConfig::new(&["digraph"]);
    config.searches = vec![SearchKind::SequenceDdmin, SearchKind::TreeHdd];
    let reports = run_campaign(&config).unwrap();
    assert!(reports[1].property_tests <= reports[0].property_tests);
    assert!(reports.iter().all(|r| r.sound));
}
