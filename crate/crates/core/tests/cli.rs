mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data_dir;
use target_ledger::io::{load_aggregate_csv, parse_matrix_csv};
use target_ledger::Money;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_target-ledger"));
    cmd.env_remove("TARGET_LEDGER_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data(name: &str) -> String {
    data_dir().join(name).display().to_string()
}

fn assert_single_line_error(out: &Output, code: i32, tag: &str) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(tag), "{err}");
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map(|r| {
            r.map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn reconstruct_with_pinned_entry_recovers_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reconstruct",
        "--aggregates",
        &data("austria.csv"),
        "--fix",
        "2,3,0",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("reconstruct.matrix.csv")).unwrap();
    let (set, m) = parse_matrix_csv(&text, "m").unwrap();
    assert_eq!(set.labels(), ["AT", "IT", "DE"]);
    assert_eq!(m.get(0, 1), Money::from_billions(100));
    assert_eq!(m.get(0, 2), Money::from_billions(-165));
    assert_eq!(m.get(1, 2), Money::ZERO);
    let meta = fs::read_to_string(dir.path().join("reconstruct.solution.txt")).unwrap();
    assert!(meta.contains("objective=min_frobenius_norm"));
    assert!(meta.contains("null_dimension=1"));
}

#[test]
fn objectives_and_labels_on_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&[
        "reconstruct",
        "--aggregates",
        &data("austria.csv"),
        "--objective",
        "min-l1",
        "--out-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let meta = fs::read_to_string(dir.path().join("reconstruct.solution.txt")).unwrap();
    // the cheapest way to explain (-65, -100, +165) routes everything to DE
    assert!(meta.contains("l1_cents=16500000000000"), "{meta}");

    let out = run(&[
        "reconstruct",
        "--aggregates",
        &data("austria.csv"),
        "--fix",
        "IT,DE,0",
        "--out-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn enumeration_lists_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reconstruct",
        "--aggregates",
        &data("austria.csv"),
        "--enumerate",
        "--bound",
        "20000000000000",
        "--quantum",
        "500000000000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("reconstruct.solutions.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 48 * 3);
    assert!(text.contains(",AT,IT,10000000000000\n"));
}

#[test]
fn strategem_runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for name in ["rollover", "love_letters", "target"] {
        let config = data(&format!("{name}.ini"));
        let first = run(&[
            "strategem",
            name,
            "--config",
            &config,
            "--out-dir",
            a.path().to_str().unwrap(),
        ]);
        let second = run(&[
            "strategem",
            name,
            "--config",
            &config,
            "--out-dir",
            b.path().to_str().unwrap(),
        ]);
        assert!(first.status.success(), "{}", stderr(&first));
        for file in listing(a.path()) {
            assert_eq!(
                fs::read(a.path().join(&file)).unwrap(),
                fs::read(b.path().join(&file)).unwrap(),
                "{file}"
            );
        }
        let digests = |o: &Output| {
            String::from_utf8_lossy(&o.stdout)
                .lines()
                .map(|l| l.split(" sha256=").nth(1).unwrap().to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(digests(&first), digests(&second));
    }
}

#[test]
fn rollover_and_love_letter_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("short.ini");
    fs::write(
        &config,
        "[scenario]\nname = short\nstrategem = rollover\n[rollover]\nprincipal = 100\nrate = 0.05\ninflation = 0.0\nhorizon = 2\n",
    )
    .unwrap();
    let out = run(&[
        "strategem",
        "rollover",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("short.summary.txt")).unwrap();
    assert!(summary.contains("final_nominal=110.25\n"), "{summary}");
    let series = fs::read_to_string(dir.path().join("short.timeseries.csv")).unwrap();
    assert!(
        series.ends_with("2,nominal,11025\n2,real,10000\n"),
        "{series}"
    );

    let out = run(&[
        "strategem",
        "love_letters",
        "--config",
        &data("love_letters.ini"),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let series = fs::read_to_string(dir.path().join("love_letters.timeseries.csv")).unwrap();
    assert_eq!(
        series,
        "t,label,value_cents\n120,exposure,250000000000\n181,exposure,450000000000\n212,exposure,350000000000\n"
    );
}

#[test]
fn net_output_feeds_the_loader_and_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&[
        "net",
        "--journal",
        &data("austria_journal.csv"),
        "--participants",
        "AT,IT,DE",
        "--base-date",
        "2012-08-31",
        "--out-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let series = load_aggregate_csv(&dir.path().join("net.aggregates.csv")).unwrap();
    assert_eq!(series.len(), 3);

    // matrix -> aggregate -> identical aggregates file
    let out = run(&[
        "aggregate",
        "--matrix",
        &format!("{d}/net.matrix.csv"),
        "--date",
        "2012-08-31",
        "--out-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(dir.path().join("aggregate.aggregates.csv")).unwrap(),
        fs::read(dir.path().join("net.aggregates.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("net.aggregates.csv")).unwrap(),
        fs::read(data_dir().join("austria.csv")).unwrap()
    );
}

#[test]
fn report_verifies_digests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(run(&[
        "strategem",
        "anfa",
        "--config",
        &data("anfa.ini"),
        "--out-dir",
        d
    ])
    .status
    .success());
    let manifest = format!("{d}/anfa.manifest.txt");
    let out = run(&["report", "--manifest", &manifest]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("verified") && text.contains("breached"),
        "{text}"
    );
    let csv = run(&["report", "--manifest", &manifest, "--format", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).contains("breached=true"));

    fs::write(dir.path().join("anfa.summary.txt"), "tampered\n").unwrap();
    assert_single_line_error(&run(&["report", "--manifest", &manifest]), 3, "E_DATA:");
}

#[test]
fn environment_variable_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("TARGET_LEDGER_OUT_DIR", dir.path())
        .args(["strategem", "rollover", "--config", &data("rollover.ini")])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("rollover.manifest.txt").exists());
}

#[test]
fn failures_exit_with_codes_and_leave_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    assert_single_line_error(&run(&["frobnicate"]), 2, "E_USAGE:");
    assert_single_line_error(&run(&["reconstruct"]), 2, "E_USAGE:");
    assert_single_line_error(
        &run(&[
            "strategem",
            "teleport",
            "--config",
            &data("rollover.ini"),
            "--out-dir",
            d,
        ]),
        2,
        "E_USAGE:",
    );
    assert_single_line_error(
        &run(&[
            "reconstruct",
            "--aggregates",
            &data("austria.csv"),
            "--objective",
            "max-fun",
            "--out-dir",
            d,
        ]),
        2,
        "E_USAGE:",
    );

    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "date,participant,balance_cents\n2012-08-31,AT,1\n2012-08-31,DE,0\n",
    )
    .unwrap();
    let out = run(&[
        "reconstruct",
        "--aggregates",
        bad.to_str().unwrap(),
        "--out-dir",
        d,
    ]);
    assert_single_line_error(&out, 3, "E_DATA:");
    assert!(stderr(&out).contains("2012-08-31"));

    let out = run(&[
        "reconstruct",
        "--aggregates",
        &data("austria.csv"),
        "--fix",
        "1,2,0",
        "--fix",
        "2,3,0",
        "--out-dir",
        d,
    ]);
    assert_single_line_error(&out, 4, "E_INFEASIBLE:");

    let bad_cfg = dir.path().join("bad.ini");
    fs::write(
        &bad_cfg,
        "[scenario]\nstrategem = rollover\n[rollover]\nprincipal = 100\nrate = -0.5\nhorizon = 3\n",
    )
    .unwrap();
    assert_single_line_error(
        &run(&[
            "strategem",
            "rollover",
            "--config",
            bad_cfg.to_str().unwrap(),
            "--out-dir",
            d,
        ]),
        2,
        "E_USAGE:",
    );

    assert_eq!(listing(dir.path()), ["bad.csv", "bad.ini"]);
}
