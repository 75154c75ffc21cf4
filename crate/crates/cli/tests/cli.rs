use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fsc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsc")).args(args).current_dir(dir).output().unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gallery_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["gallery", "noiseless-z", "--eps", "1/4"], "noiseless_z.json"),
        (&["gallery", "w-lambda", "--eps", "1/4", "--lambda", "1/4"], "w_lambda.json"),
        (&["gallery", "extend-states", "--lambda", "1/4", "--s", "3"], "extend_states_3.json"),
    ];
    for (args, name) in cases {
        assert_eq!(stdout(&fsc(args, dir.path())), golden(name), "{name}");
        let mut with_out = args.to_vec();
        with_out.extend(["--out", "g.json"]);
        stdout(&fsc(&with_out, dir.path()));
        assert_eq!(std::fs::read_to_string(dir.path().join("g.json")).unwrap(), golden(name));
    }
}

#[test]
fn validate_reports_structure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pair.json"), golden("noiseless_z.json")).unwrap();
    std::fs::write(dir.path().join("wl.json"), golden("w_lambda.json")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&fsc(&["validate", "pair.json", "--format", "json"], dir.path()))).unwrap();
    assert_eq!(json["results"]["unifilar"], true);
    assert_eq!(json["results"]["connectivity"]["strongly_connected"], false);
    let table = stdout(&fsc(&["validate", "wl.json"], dir.path()));
    assert!(table.lines().any(|l| l.starts_with("strongly_connected") && l.ends_with("yes")));
}

#[test]
fn malformed_row_fails_with_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let bad = golden("noiseless_z.json").replacen("\"3/4\"", "\"13/20\"", 1);
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let out = fsc(&["validate", "bad.json"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(s'=1, x=0)"), "{err}");
    let missing = fsc(&["validate", "nope.json"], dir.path());
    assert!(!missing.status.success());
}

#[test]
fn capacity_and_measures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pair.json"), golden("noiseless_z.json")).unwrap();
    let csv_text = stdout(&fsc(&["capacity", "pair.json", "--n", "3", "--sweep-n", "--s0", "0", "--format", "csv"], dir.path()));
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let values: Vec<f64> = reader.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-6));

    let json: serde_json::Value = serde_json::from_str(&stdout(&fsc(
        &["capacity", "pair.json", "--n", "1", "--s0", "1", "--policy-out", "pol.json", "--format", "json"],
        dir.path(),
    )))
    .unwrap();
    let z = json["results"]["estimates"][0]["value"].as_f64().unwrap();
    assert!((z - 0.558_238_626_737_345_5).abs() < 1e-6);
    let di: serde_json::Value = serde_json::from_str(&stdout(&fsc(
        &["directed-info", "pair.json", "--policy", "pol.json", "--s0", "1", "--format", "json"],
        dir.path(),
    )))
    .unwrap();
    assert!((di["results"]["rate"].as_f64().unwrap() - z).abs() < 1e-9);

    let dmc: serde_json::Value =
        serde_json::from_str(&stdout(&fsc(&["dmc-capacity", "pair.json", "--state", "1", "--format", "json"], dir.path()))).unwrap();
    assert!((dmc["results"]["capacity"].as_f64().unwrap() - z).abs() < 1e-6);
}

#[test]
fn lambda_sequence_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv_text = stdout(&fsc(&["lambda-seq", "--mock", "halt:3", "--m-max", "5", "--format", "csv"], dir.path()));
    let col: Vec<String> = csv::Reader::from_reader(csv_text.as_bytes())
        .records()
        .map(|r| r.unwrap()[1].to_string())
        .collect();
    assert_eq!(col, ["1/2", "1/4", "1/8", "1/8", "1/8"]);
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&fsc(&["lambda-seq", "--mock", "never", "--format", "json"], dir.path()))).unwrap();
    assert_eq!(json["results"]["certificate"]["passed"], true);
    assert_eq!(json["results"]["lambda"][19], "1/1048576");
    assert!(!fsc(&["lambda-seq", "--mock", "sometimes"], dir.path()).status.success());
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!fsc(&["capacity"], dir.path()).status.success());
    assert!(!fsc(&["gallery", "w-lambda", "--lambda", "3/4"], dir.path()).status.success());
    assert!(!fsc(&["dmc-capacity", "--eps", "1/2"], dir.path()).status.success());
}
