//! End-to-end tests of the `cfc` binary: CSV schemas, determinism, exit
//! codes, and the image round trip.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU64, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn tmp_path(name: &str) -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = format!(
        "cfc-test-{}-{}-{name}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    std::env::temp_dir().join(unique)
}

/// Field accessor for one-header CSV output.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header present")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let idx = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} in {header:?}"));
    row[idx].parse().expect("numeric field")
}

const IDEAL: &[&str] = &[
    "--heralding",
    "1",
    "--det-eff",
    "1",
    "--dark-prob",
    "0",
    "--visibility",
    "1",
    "--backscatter",
    "0",
];

#[test]
fn theory_single_cell_ideal_values() {
    let mut args = vec!["--command", "theory", "--n", "2", "--m", "1"];
    args.extend_from_slice(IDEAL);
    let out = stdout(&run(&args));
    let (header, rows) = csv_rows(&out);
    assert_eq!(
        header,
        [
            "n",
            "m",
            "p1_err",
            "p0_err",
            "avg_err_exact",
            "avg_err_approx",
            "violation",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert!((field(&header, &rows[0], "p1_err") - 0.75).abs() < 1e-9);
    assert!((field(&header, &rows[0], "avg_err_exact") - 0.375).abs() < 1e-9);
    assert!(field(&header, &rows[0], "p0_err") < 1e-20);
    assert!(field(&header, &rows[0], "violation") < 1e-20);
}

#[test]
fn theory_grid_is_deterministic_and_unimodal() {
    let args = [
        "--command",
        "theory",
        "--n",
        "2..6",
        "--m-range",
        "1..1000",
        "--seed",
        "5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "repeated runs must be byte-identical");

    let text = stdout(&a);
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 5 * 1000);
    for n in 2..=6 {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == n.to_string())
            .map(|r| field(&header, r, "avg_err_exact"))
            .collect();
        assert_eq!(errs.len(), 1000);
        let argmin = errs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        for w in errs[..argmin].windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "n = {n}: rising before the minimum");
        }
        for w in errs[argmin..].windows(2) {
            assert!(w[1] >= w[0] - 1e-15, "n = {n}: falling after the minimum");
        }
    }
}

#[test]
fn sweep_matches_theory_within_five_sigma() {
    let args = [
        "--command",
        "sweep",
        "--n",
        "6",
        "--m",
        "320",
        "--trials",
        "20000",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);

    let text = stdout(&a);
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let trials = field(&header, row, "trials");
        let rate = field(&header, row, "err_rate");
        let theory = field(&header, row, "err_theory");
        let se = (theory * (1.0 - theory) / trials).sqrt().max(1e-9);
        assert!(
            (rate - theory).abs() < 5.0 * se,
            "row {row:?}: {rate} vs {theory}"
        );
        let lo = field(&header, row, "wilson_lo");
        let hi = field(&header, row, "wilson_hi");
        assert!(lo <= rate && rate <= hi);
    }
}

#[test]
fn sweep_emits_the_four_photon_grid() {
    let out = stdout(&run(&[
        "--command",
        "sweep",
        "--n",
        "6",
        "--m",
        "10,50,320,500",
        "--trials",
        "10",
    ]));
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 8, "four m values times two bit values");
    let ms: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(ms, ["10", "10", "50", "50", "320", "320", "500", "500"]);
}

#[test]
fn transmit_reports_one_row() {
    let args = [
        "--command",
        "transmit",
        "--n",
        "6",
        "--m",
        "320",
        "--bits",
        "512",
        "--seed",
        "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    let fid = field(&header, &rows[0], "fidelity");
    let err = field(&header, &rows[0], "avg_bit_error");
    assert!((fid + err - 1.0).abs() < 1e-12);
    assert!(fid > 0.9, "calibrated channel at m = 320: fidelity {fid}");
}

/// A balanced 16x16 test card: left half white, right half black.
fn test_card() -> String {
    let mut bits = String::new();
    for y in 0..16 {
        for x in 0..16 {
            bits.push(if x < 8 { '1' } else { '0' });
            bits.push(if x == 15 { '\n' } else { ' ' });
        }
        let _ = y;
    }
    format!("P1\n16 16\n{bits}")
}

#[test]
fn image_over_an_ideal_channel_is_returned_verbatim() {
    let input = tmp_path("ideal-in.pbm");
    let output = tmp_path("ideal-out.pbm");
    fs::write(&input, test_card()).unwrap();

    let mut args = vec![
        "--command",
        "image",
        "--n",
        "6",
        "--m",
        "16",
        "--in",
        input.to_str().unwrap(),
        "--out",
        output.to_str().unwrap(),
    ];
    args.extend_from_slice(IDEAL);
    let text = stdout(&run(&args));
    let (header, rows) = csv_rows(&text);
    assert_eq!(field(&header, &rows[0], "fidelity"), 1.0);
    assert_eq!(fs::read_to_string(&output).unwrap(), test_card());

    fs::remove_file(&input).ok();
    fs::remove_file(&output).ok();
}

#[test]
fn image_fidelity_grows_with_photon_budget() {
    let input = tmp_path("budget-in.pbm");
    fs::write(&input, test_card()).unwrap();

    let mut fidelities = Vec::new();
    for m in ["10", "320"] {
        let output = tmp_path(&format!("budget-out-{m}.pbm"));
        let text = stdout(&run(&[
            "--command",
            "image",
            "--n",
            "6",
            "--m",
            m,
            "--seed",
            "17",
            "--in",
            input.to_str().unwrap(),
            "--out",
            output.to_str().unwrap(),
        ]));
        let (header, rows) = csv_rows(&text);
        fidelities.push(field(&header, &rows[0], "fidelity"));
        fs::remove_file(&output).ok();
    }
    assert!(
        fidelities[0] < 0.8,
        "m = 10 cannot beat the losses: fidelity {}",
        fidelities[0]
    );
    assert!(
        fidelities[1] >= 0.97,
        "m = 320 carries the image: fidelity {}",
        fidelities[1]
    );
    fs::remove_file(&input).ok();
}

#[test]
fn config_file_is_overridden_by_flags() {
    let config = tmp_path("settings.cfg");
    fs::write(
        &config,
        "# sweep defaults\ncommand=theory\nn=2\nm=1\nheralding=1\ndet-eff=1\n\
         dark-prob=0\nvisibility=1\nbackscatter=0\nseed=9\n",
    )
    .unwrap();

    let from_file = stdout(&run(&["--config", config.to_str().unwrap()]));
    let (header, rows) = csv_rows(&from_file);
    assert_eq!(rows[0][1], "1");
    assert!((field(&header, &rows[0], "avg_err_exact") - 0.375).abs() < 1e-9);

    let overridden = stdout(&run(&["--config", config.to_str().unwrap(), "--m", "2"]));
    let (_, rows) = csv_rows(&overridden);
    assert_eq!(rows[0][1], "2");

    fs::remove_file(&config).ok();
}

#[test]
fn output_file_matches_stdout_bytes() {
    let path = tmp_path("theory.csv");
    let piped = stdout(&run(&["--command", "theory", "--n", "6", "--m", "10,320"]));
    stdout(&run(&[
        "--command",
        "theory",
        "--n",
        "6",
        "--m",
        "10,320",
        "--out",
        path.to_str().unwrap(),
    ]));
    assert_eq!(fs::read_to_string(&path).unwrap(), piped);
    fs::remove_file(&path).ok();
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["--command", "warp"],
        vec!["--command", "theory", "--n", "1"],
        vec!["--command", "theory", "--m", "0"],
        vec!["--command", "theory", "--frobnicate", "1"],
        vec!["--command", "image", "--m", "10"],
        vec!["--command", "theory", "--m", "1", "--m-range", "1..5"],
        vec!["--command", "theory", "--det-eff", "0"],
        vec!["--command", "theory", "--visibility", "0.4"],
        vec![],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn input_errors_exit_3() {
    let missing = tmp_path("missing.pbm");
    let out_path = tmp_path("never.pbm");
    let out = run(&[
        "--command",
        "image",
        "--in",
        missing.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let bad = tmp_path("bad.pbm");
    fs::write(&bad, "P4\n2 2\n\0\0").unwrap();
    let out = run(&[
        "--command",
        "image",
        "--in",
        bad.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("P4"), "stderr: {stderr}");
    fs::remove_file(&bad).ok();
}

#[test]
fn help_exits_clean() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("USAGE"));
}
