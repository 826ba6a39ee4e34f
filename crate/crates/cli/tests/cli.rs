use std::io::Write;
use std::process::Command;

use mdmotif_cli::{run_cli, RunReport, EXIT_INPUT, EXIT_OK, EXIT_PARTIAL};

fn run(args: &[&str]) -> (i32, RunReport) {
    let mut out = Vec::new();
    let code = run_cli(std::iter::once("mdmotif").chain(args.iter().copied()), &mut out);
    let text = String::from_utf8(out).unwrap();
    let report = RunReport::parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    (code, report)
}

fn exit_code(args: &[&str]) -> i32 {
    let mut out = Vec::new();
    run_cli(std::iter::once("mdmotif").chain(args.iter().copied()), &mut out)
}

const PLANTED: &[&str] = &["--generate", "n=2000,D=5,d=2,w=300", "--k", "1", "--dims", "2", "--delta", "0.01"];

#[test]
fn generated_planted_pair_is_reported() {
    let (code, report) = run(PLANTED);
    assert_eq!(code, EXIT_OK);
    assert_eq!(report.motifs.len(), 1);
    let planted = report.summary.planted.unwrap();
    assert_eq!((report.motifs[0].a, report.motifs[0].b), planted);
    assert!(report.motifs[0].failure_bound <= 0.01);
    assert_eq!(report.summary.concatenations, Some(8));
    assert_eq!(report.summary.repetitions, Some(196));
    assert_eq!(report.summary.delta, 0.01);
    assert!(!report.summary.partial);
}

#[test]
fn exact_path_agrees_with_discovery() {
    let (_, lsh) = run(PLANTED);
    let mut args = PLANTED.to_vec();
    args.push("--exact");
    let (code, exact) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(exact.motifs.len(), 1);
    assert_eq!((exact.motifs[0].a, exact.motifs[0].b), (lsh.motifs[0].a, lsh.motifs[0].b));
    assert_eq!(exact.motifs[0].dist_d.to_bits(), lsh.motifs[0].dist_d.to_bits());
    assert_eq!(exact.motifs[0].failure_bound, 0.0);
    assert!(exact.summary.fallback_used);
    assert_eq!(exact.summary.concatenations, None);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["--generate", "n=800,D=3,d=2,w=40", "--dims", "1..3", "--k", "2", "--seed", "5"];
    let (_, first) = run(&args);
    let (_, second) = run(&args);
    let strip = |r: &RunReport| {
        r.motifs
            .iter()
            .map(|m| (m.d, m.a, m.b, m.dims.clone(), m.dist_d.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&first), strip(&second));
    assert_eq!(first.summary.counters, second.summary.counters);
    assert_eq!(first.summary.confirmation_order, second.summary.confirmation_order);
}

#[test]
fn records_stream_in_confirmation_order() {
    let (_, report) = run(&["--generate", "n=800,D=4,d=2,w=40", "--dims", "1..4", "--k", "2", "--seed", "3"]);
    let times: Vec<f64> = report.motifs.iter().map(|m| m.confirmed_ms).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    let mut emitted: Vec<usize> = report.motifs.iter().map(|m| m.d).collect();
    emitted.dedup();
    assert_eq!(emitted, report.summary.confirmation_order);
    for dim in &report.summary.dimensions {
        let motifs = report.motifs_for(dim.d);
        assert_eq!(motifs.len(), dim.motifs);
        assert_eq!(motifs.last().map(|m| m.dist_d), dim.queue_max);
    }
}

#[test]
fn csv_input_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("series.csv");
    let mut file = std::fs::File::create(&input).unwrap();
    writeln!(file, "x;y").unwrap();
    for t in 0..300 {
        let t = t as f64;
        writeln!(file, "{};{}", (t * 0.3).sin() + t * 0.01, (t * 0.17).cos() * (1.0 + t / 100.0)).unwrap();
    }
    drop(file);
    let output = dir.path().join("out.jsonl");
    let args = [
        "mdmotif",
        "--input",
        input.to_str().unwrap(),
        "--header",
        "--delimiter",
        ";",
        "--window",
        "20",
        "--dims",
        "1..2",
        "--k",
        "2",
        "--output",
        output.to_str().unwrap(),
    ];
    let mut stdout = Vec::new();
    assert_eq!(run_cli(args, &mut stdout), EXIT_OK);
    assert!(stdout.is_empty());
    let report = RunReport::parse(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(report.summary.n, 300);
    assert_eq!(report.summary.series_dims, 2);
    assert_eq!(report.motifs_for(1).len(), 2);
    assert_eq!(report.motifs_for(2).len(), 2);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,NaN\n").unwrap();
    let bad = bad.to_str().unwrap();
    assert_eq!(exit_code(&["--input", bad, "--window", "1", "--dims", "1"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--generate", "n=500,D=2,d=1,w=20", "--dims", "3"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--generate", "n=500,D=2,d=1,w=20", "--delta", "0"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--generate", "n=10,D=2,d=1,w=20"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--generate", "n=500,D=2"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--window", "5"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--input", "/nonexistent/file.csv", "--window", "5", "--dims", "1"]), EXIT_INPUT);
    assert_eq!(exit_code(&["--input", bad, "--generate", "n=500,D=2,d=1,w=20"]), EXIT_INPUT);
}

#[test]
fn too_few_pairs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.csv");
    std::fs::write(&input, "0\n1\n3\n2\n5\n4\n").unwrap();
    let (code, report) = run(&[
        "--input",
        input.to_str().unwrap(),
        "--window",
        "4",
        "--dims",
        "1",
        "--k",
        "2",
        "--exclusion",
        "1",
    ]);
    assert_eq!(code, EXIT_PARTIAL);
    assert!(report.summary.partial);
    assert_eq!(report.motifs.len(), 1);
}

#[test]
fn binary_writes_json_lines() {
    let output = Command::new(env!("CARGO_BIN_EXE_mdmotif"))
        .args(["--generate", "n=600,D=3,d=2,w=30", "--k", "2", "--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(output.stdout).unwrap();
    let report = RunReport::parse(&text).unwrap();
    assert_eq!(report.motifs.len(), 2);
    assert!(text.lines().last().unwrap().starts_with("{\"type\":\"summary\""));

    let failed = Command::new(env!("CARGO_BIN_EXE_mdmotif"))
        .args(["--generate", "n=600,D=3,d=2,w=30", "--dims", "4"])
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("exceeds"));
}
