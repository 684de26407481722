use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_adrcause");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_dir(dir: &Path, patients: &str, rx: &str, events: &str, labels: &str) {
    std::fs::write(
        dir.join("patients.csv"),
        format!("patient_id,gender,birth_year\n{patients}"),
    )
    .unwrap();
    std::fs::write(
        dir.join("prescriptions.csv"),
        format!("patient_id,date,drug_code,bnf_code,dosage_value,dosage_unit\n{rx}"),
    )
    .unwrap();
    std::fs::write(dir.join("events.csv"), format!("patient_id,date,read_code\n{events}")).unwrap();
    std::fs::write(dir.join("labels.csv"), format!("drug_code,read_code,label\n{labels}")).unwrap();
}

/// Three labelled pairs; D2 has no mg prescriptions.
fn fixture(dir: &Path) {
    write_dir(
        dir,
        "P1,M,1950\nP2,F,1960\nP3,M,1970\nP4,F,1980\n",
        "P1,100,D1,B1,10,mg\nP2,100,D1,B1,20,mg\nP3,100,D2,B1,5,%\nP4,100,D2,B1,,\nP4,500,D1,B1,20,mg\n",
        "P1,110,H33..\nP2,90,G30..\nP3,105,H33..\nP4,510,H33a.\n",
        "D1,H33..,ADR\nD1,G30..,indicator\nD2,H33..,noise\n",
    );
}

const SCENARIO: &str = "\
seed = 5
n_patients = 400
observation_days = 1200
drug = D1 B1 10,20 0.004
drug = D2 B1 10 0.004
drug = D3 B2 5,50 0.004
event = H33.. 0.0008
event = G30.. 0.0008
event = F12a. 0.0008
relation = D1 H33.. ADR multiplier=5 dose_slope=1
relation = D2 G30.. indicator prob=0.8
relation = D3 F12a. noise
relation = D3 H33.. noise
";

#[test]
fn validate_ok_and_orphan() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path());
    let out = run(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("ok: 4 patients, 5 prescriptions"));

    let bad = TempDir::new().unwrap();
    write_dir(bad.path(), "P1,M,1950\n", "P1,0,D,B,,\nP9,3,D,B,,\n", "", "");
    let out = run(&["validate", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("prescriptions.csv:3") && err.contains("P9"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["features"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    fixture(dir.path());
    let d = dir.path().to_str().unwrap();
    assert_eq!(run(&["features", d, "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["features", d, "--month-days", "x"]).status.code(), Some(2));
    assert_eq!(run(&["features", d, "--workers", "0"]).status.code(), Some(2));
    assert_eq!(run(&["features", d, "--extractors", "nope"]).status.code(), Some(2));
}

#[test]
fn features_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path());
    let d = dir.path().to_str().unwrap();
    let out = run(&["features", d, "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let tsv = stdout(&out);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(header.len(), 3 + 2 * 26);
    assert_eq!(header[..4], ["drug_code", "read_code", "label", "leopard"]);
    assert_eq!(header[3 + 25], "spearman");
    assert_eq!(header[3 + 26], "leopard_missing");
    let keys: Vec<(&str, &str)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(keys, [("D1", "G30.."), ("D1", "H33.."), ("D2", "H33..")]);

    // no mg prescriptions: dosage columns zero and flagged
    let d2: Vec<&str> = lines[3].split('\t').collect();
    for name in ["dosage_ratio", "high_low_ratio", "pearson", "spearman"] {
        let j = header.iter().position(|h| *h == name).unwrap();
        assert_eq!(d2[j], "0.000000", "{name}");
        let k = header.iter().position(|h| *h == format!("{name}_missing")).unwrap();
        assert_eq!(d2[k], "1", "{name}_missing");
    }

    let again = run(&["features", d, "--workers", "1"]);
    assert_eq!(stdout(&again), tsv);
}

#[test]
fn extractor_subset() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path());
    let out = run(&[
        "features",
        dir.path().to_str().unwrap(),
        "--extractors",
        "temporality,dosage",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let header = stdout(&out).lines().next().unwrap().to_string();
    assert_eq!(header.split('\t').count(), 3 + 2 * 9);
}

#[test]
fn select_report_layout() {
    let dir = TempDir::new().unwrap();
    let matrix = dir.path().join("m.tsv");
    // leopard separates the classes perfectly; rd is constant
    let mut text = String::from("drug_code\tread_code\tlabel\tleopard\trd\tleopard_missing\trd_missing\n");
    for i in 0..6 {
        let (label, flag) = if i % 2 == 0 {
            ("ADR", "1.000000")
        } else {
            ("noise", "0.000000")
        };
        text.push_str(&format!("D{i}\tH33..\t{label}\t{flag}\t0.100000\t0\t0\n"));
    }
    std::fs::write(&matrix, text).unwrap();
    let report = dir.path().join("r.tsv");
    let out = run(&["select", matrix.to_str().unwrap(), "-o", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body = std::fs::read_to_string(&report).unwrap();
    assert_eq!(
        body,
        "attribute\tclass_correlation\tcfs_rank_or_proxy\nleopard\t1.000000\t1\nrd\t0.000000\t-\n"
    );
}

#[test]
fn select_degenerate_matrix_fails() {
    let dir = TempDir::new().unwrap();
    let matrix = dir.path().join("m.tsv");
    std::fs::write(
        &matrix,
        "drug_code\tread_code\tlabel\trd\trd_missing\nD\tH33..\tADR\t0.1\t0\nE\tH33..\tADR\t0.2\t0\n",
    )
    .unwrap();
    let out = run(&["select", matrix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn synth_validate_report_round_trip() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("scenario.cfg");
    std::fs::write(&config, SCENARIO).unwrap();
    let data = dir.path().join("data");
    let (c, d) = (config.to_str().unwrap(), data.to_str().unwrap());
    assert_eq!(run(&["synth", c, d]).status.code(), Some(0));
    let first = std::fs::read_to_string(data.join("events.csv")).unwrap();
    assert_eq!(run(&["synth", c, d]).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(data.join("events.csv")).unwrap(), first);

    let out = run(&["validate", d]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let features = dir.path().join("f.tsv");
    let out = run(&[
        "report",
        d,
        "--workers",
        "1",
        "--features-out",
        features.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(report.lines().count(), 27);

    // the two-step path gives the same report
    let out = run(&["select", features.to_str().unwrap()]);
    assert_eq!(stdout(&out), report);

    // ordering is by class correlation, nonincreasing
    let corr: Vec<f64> = report
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(corr.windows(2).all(|w| w[0] >= w[1]));

    let parallel = run(&["report", d, "--workers", "4"]);
    assert_eq!(stdout(&parallel), report);
}

#[test]
fn synth_config_error_names_line() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "seed = 1\nn_patients = ten\n").unwrap();
    let out = run(&[
        "synth",
        config.to_str().unwrap(),
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}
