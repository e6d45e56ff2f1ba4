use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use icf_cli::{TableRow, CSV_COLUMNS};
use serde::Deserialize;

fn icf(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icf"))
        .args(args)
        .env("ICF_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_csv(path: &Path) -> Vec<TableRow> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    r.deserialize().map(|row| row.unwrap()).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct JsonDoc {
    config: serde_json::Value,
    seed: Option<u64>,
    rows: Vec<TableRow>,
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        let common = [
            "--preset", "fig8", "--steps", "3", "--shots", "2000", "--trials", "5", "--seed", "42",
            "--format", format, "--out",
        ];
        let run = |path: &Path, workers| {
            let mut args = common.to_vec();
            args.push(path.to_str().unwrap());
            ok(&icf(&args, workers));
        };
        run(&a, "1");
        run(&b, "3");
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{format}");
    }
}

#[test]
fn csv_schema_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let out = icf(
        &[
            "--preset",
            "fig4",
            "--shots",
            "1000",
            "--trials",
            "4",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ],
        "1",
    );
    ok(&out);
    assert!(out.stdout.is_empty());
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 16);
    assert_eq!((rows[0].mean_re, rows[0].se_re), (Some(0.0), Some(0.0)));
    for r in &rows {
        assert_eq!(r.exact_im, Some(0.0));
        assert!(r.analytic_re.is_some());
    }
    // τ = 1 is step 5 at δτ = 0.2.
    let tau1 = &rows[5];
    assert!((tau1.time - 1.0).abs() < 1e-12);
    assert!((tau1.exact_re.unwrap() + 0.4164).abs() < 5e-5);

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).unwrap();
    }
    assert_eq!(w.into_inner().unwrap(), fs::read(&path).unwrap());
}

#[test]
fn json_schema_round_trips() {
    let out = icf(
        &[
            "--preset",
            "fig6",
            "--steps",
            "2",
            "--backend",
            "shot-free",
            "--format",
            "json",
            "--oracle",
            "trotter",
        ],
        "2",
    );
    ok(&out);
    let doc: JsonDoc = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.seed, None);
    assert_eq!(doc.config["preset"], "fig6");
    assert_eq!(doc.config["params"]["qubits"], 2);
    assert_eq!(doc.rows.len(), 3);
    for r in &doc.rows {
        // Shot-free against the Trotter product: equal to rounding.
        assert!((r.mean_re.unwrap() - r.exact_re.unwrap()).abs() < 1e-9);
        assert_eq!(r.analytic_re, None);
    }
}

#[test]
fn failed_runs_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let out = icf(
        &[
            "--gamma",
            "2",
            "--steps",
            "10",
            "--backend",
            "faithful",
            "--seed",
            "1",
            "--out",
            path.to_str().unwrap(),
        ],
        "1",
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("limit of 30"), "{err}");
    assert!(!path.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let out = icf(&["--preset", "fig4"], "1");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn custom_hamiltonian_and_qasm_export() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    fs::write(
        &h,
        "# two-site toy\n0.5 0.0 ZZ\n-0.25 0.0 XI\n\n0.0 0.3 IY\n",
    )
    .unwrap();
    let qasm = dir.path().join("qasm");
    let out = icf(
        &[
            "--hamiltonian",
            h.to_str().unwrap(),
            "--gamma",
            "2",
            "--scenario",
            "hermitian-real-time",
            "--steps",
            "2",
            "--backend",
            "shot-free",
            "--oracle",
            "trotter",
            "--export-qasm",
            qasm.to_str().unwrap(),
        ],
        "1",
    );
    ok(&out);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<TableRow> = r.deserialize().map(|x| x.unwrap()).collect();
    assert!((rows[0].mean_re.unwrap() - 4.0).abs() < 1e-12);
    for row in &rows {
        let got = (row.mean_re.unwrap(), row.mean_im.unwrap());
        let want = (row.exact_re.unwrap(), row.exact_im.unwrap());
        assert!((got.0 - want.0).abs() < 1e-9 && (got.1 - want.1).abs() < 1e-9);
    }
    let mut names: Vec<String> = fs::read_dir(&qasm)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["custom_step2_im.qasm", "custom_step2_re.qasm"]);
    let text = fs::read_to_string(qasm.join("custom_step2_re.qasm")).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
}
