//! End-to-end checks of the command-line surface: config-file merging,
//! matrix dumps, the comparison report, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toprank_cli_{tag}"));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toprank"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = temp_dir("config");
    let config = dir.join("run.conf");
    std::fs::write(
        &config,
        "# fixed-item run\nmeasure=sumloss\nm=6\nT=500\nk=2\nseed=3\nones=2\n",
    )
    .unwrap();
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");

    // All parameters from the config file.
    let out = run(&[
        "noncontextual",
        "--config",
        &config.to_string_lossy(),
        "--out",
        &out_a.to_string_lossy(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_a).unwrap();
    assert_eq!(text.lines().count(), 501); // header + T rows

    // An explicit flag overrides the config value.
    let out = run(&[
        "noncontextual",
        "--config",
        &config.to_string_lossy(),
        "--T",
        "200",
        "--out",
        &out_b.to_string_lossy(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(text.lines().count(), 201);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn observability_dump_reproduces_the_reference_layout() {
    let dir = temp_dir("dump");
    let out = run(&[
        "observability",
        "--measure",
        "sumloss",
        "--m",
        "3",
        "--n",
        "1",
        "--dump-matrices",
        &dir.to_string_lossy(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("global observability: holds"));

    let loss = std::fs::read_to_string(dir.join("loss.csv")).unwrap();
    let lines: Vec<&str> = loss.lines().collect();
    assert_eq!(lines[0], "action,000,001,010,011,100,101,110,111");
    assert_eq!(lines[1], "123,0,3,2,5,1,4,3,6");
    assert_eq!(lines[6], "321,0,1,2,3,3,4,5,6");
    let feedback = std::fs::read_to_string(dir.join("feedback.csv")).unwrap();
    assert_eq!(feedback.lines().nth(4).unwrap(), "231,0,1,0,1,0,1,0,1");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn normalized_measures_report_failure_and_missing_args_error() {
    let out = run(&["observability", "--measure", "auc", "--m", "4", "--n", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("global observability: fails"));

    // Missing required option (no flag, no config).
    let out = run(&["observability"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("measure"));
}

#[test]
fn experiment_exit_code_reflects_grid_failures() {
    let dir = temp_dir("exitcode");
    // Block count 400 with T=400 means block size 1, too small to explore
    // m=5 items at depth 1; that grid point must fail while K=4 succeeds.
    let out = run(&[
        "experiment",
        "--scenario",
        "block-size",
        "--out-dir",
        &dir.to_string_lossy(),
        "--seeds",
        "2",
        "--m",
        "5",
        "--T",
        "400",
        "--K-list",
        "4,400",
    ]);
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("K400: FAILED"));
    assert!(dir.join("K4.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn compare_summarizes_curves_and_rejects_bad_schemas() {
    let dir = temp_dir("compare");
    let out = run(&[
        "experiment",
        "--scenario",
        "full-info",
        "--out-dir",
        &dir.to_string_lossy(),
        "--seeds",
        "2",
        "--m",
        "5",
        "--T",
        "300",
        "--K",
        "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let top1 = dir.join("top1.csv");
    let full = dir.join("full.csv");
    let out = run(&["compare", &top1.to_string_lossy(), &full.to_string_lossy()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("label,final_median,tail_slope"));
    assert!(stdout.contains("top1,"));
    assert!(stdout.contains("full,"));

    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "wrong,header\n1,2\n").unwrap();
    let out = run(&["compare", &bad.to_string_lossy()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn contextual_runs_on_a_ranking_file() {
    let dir = temp_dir("datafile");
    let data = dir.join("queries.txt");
    // Three queries, three docs each, two features; grades follow feature 1.
    let mut text = String::new();
    for q in 0..3 {
        for (doc, grade) in [(0.9, 2u8), (0.4, 1), (0.1, 0)] {
            text.push_str(&format!("{grade} qid:{q} 1:{doc} 2:{}\n", 0.5 - doc));
        }
    }
    std::fs::write(&data, text).unwrap();
    let out_csv = dir.join("run.csv");
    let out = run(&[
        "contextual",
        "--surrogate",
        "squared",
        "--data",
        &data.to_string_lossy(),
        "--max-grade",
        "2",
        "--m",
        "3",
        "--T",
        "300",
        "--U",
        "5",
        "--seed",
        "2",
        "--out",
        &out_csv.to_string_lossy(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("data: 3 queries, dimension 2"));
    let csv = std::fs::read_to_string(&out_csv).unwrap();
    assert_eq!(csv.lines().count(), 301);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn adversary_stream_prints_binary_rounds() {
    let out = run(&[
        "adversary",
        "stream",
        "--m",
        "6",
        "--ones",
        "2",
        "--rounds",
        "4",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    for (i, line) in lines.iter().enumerate() {
        let (idx, bits) = line.split_once(' ').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), i + 1);
        assert_eq!(bits.len(), 6);
        assert!(bits.chars().all(|c| c == '0' || c == '1'));
    }
}
