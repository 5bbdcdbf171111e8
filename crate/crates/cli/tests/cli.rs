use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mimetic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimetic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_values(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn lid2d_default_is_divergence_free() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lid");
    let o = mimetic(&[
        "solve",
        "--case",
        "lid2d",
        "--elements",
        "2",
        "--degree",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["divergence_free"], true);
    assert!(s["max_div"].as_f64().unwrap() <= 1e-10);
    assert!(s["errors"].is_null());
    assert!(std::fs::read_to_string(out.join("fields.vtk"))
        .unwrap()
        .contains("POINT_DATA 2500"));
    let rows = csv_values(&out.join("fields.csv"));
    assert_eq!(rows.len(), 50 * 50);
    let lid: Vec<_> = rows
        .iter()
        .filter(|r| r[1] == 1.0 && r[0] > 0.0 && r[0] < 1.0)
        .collect();
    assert_eq!(lid.len(), 48);
    // the tangential lid speed is imposed weakly
    let mean = lid.iter().map(|r| r[3]).sum::<f64>() / 48.0;
    assert!((mean + 1.0).abs() < 0.1, "{mean}");
    assert!(lid.iter().all(|r| r[4].abs() < 1e-12));
}

#[test]
fn manufactured_solution_reports_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let o = mimetic(&[
        "solve",
        "--case",
        "manufactured2d",
        "--resolution",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = summary(out);
    assert!(s["errors"]["u_l2"].as_f64().unwrap() < 1e-2);
    let rows = csv_values(&out.join("fields.csv"));
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn lid3d_writes_slices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let o = mimetic(&[
        "solve",
        "--case",
        "lid3d",
        "--elements",
        "2",
        "--degree",
        "4",
        "--resolution",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = summary(out);
    assert_eq!(s["dim"], 3);
    assert_eq!(s["divergence_free"], true);
    let slices = csv_values(&out.join("slices.csv"));
    assert_eq!(slices.len(), 3 * 49);
    for y in [0.1, 0.5, 0.9] {
        assert_eq!(slices.iter().filter(|r| r[11] == y && r[1] == y).count(), 49);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let o = mimetic(&[
            "solve",
            "--case",
            "trig2d",
            "--elements",
            "3",
            "--degree",
            "3",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    for f in ["summary.json", "fields.csv", "fields.vtk"] {
        assert_eq!(
            std::fs::read(dirs[0].join(f)).unwrap(),
            std::fs::read(dirs[1].join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn converge_writes_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let o = mimetic(&[
        "converge",
        "--elements",
        "2,4,8",
        "--degrees",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("dim,N,K,h"));
    assert_eq!(lines.len(), 5);
    for l in &lines[1..4] {
        let max_div: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(max_div <= 1e-10);
    }
    let footer: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(&footer[..3], &["2", "2", "rate"]);
    let hcurl: f64 = footer[5].parse().unwrap();
    assert!(hcurl > 1.8);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    for args in [
        vec!["converge", "--elements", "", "--out", out],
        vec!["solve", "--case", "nope", "--out", out],
        vec!["solve", "--degree", "0", "--out", out],
        vec!["converge", "--case", "lid2d", "--out", out],
        vec!["frobnicate"],
    ] {
        assert_eq!(mimetic(&args).status.code(), Some(2), "{args:?}");
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_mimetic"))
        .args(["check"])
        .env("MIMETIC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    let out = tmp.path().join("o");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"case": "trig2d", "elements": [2], "degree": 2, "resolution": 4, "out": {:?}}}"#,
            out
        ),
    )
    .unwrap();
    let o = mimetic(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(
        (s["case"].as_str(), s["degree"].as_u64(), s["resolution"].as_u64()),
        (Some("trig2d"), Some(2), Some(4))
    );
}

#[test]
fn check_passes_and_catches_a_sign_flip() {
    let ok = mimetic(&["check"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&ok.stdout).contains("FAIL"));
    let bad = mimetic(&["check", "--inject-div-sign-flip"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL DC = 0"));
}
