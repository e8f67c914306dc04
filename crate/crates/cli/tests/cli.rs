use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tomokit::io::{read_phasegrid, read_tomogram_csv, write_phasegrid};
use tomokit::{Frame, GaussianState, GridKind, PhaseGrid, Tomogram, Window};

fn tomokit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomokit")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn normal_pdf(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

#[test]
fn vacuum_on_the_two_axes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("frames.txt"), "# axes\n1 0\n0 1\n").unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--state", "gaussian", "--frames", "frames.txt", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t: Tomogram<f64> = read_tomogram_csv(&fs::read_to_string(dir.path().join("t.csv")).unwrap()).unwrap();
    assert_eq!(t.marginals().len(), 2);
    for m in t.marginals() {
        assert!((m.integral() - 1.0).abs() < 1e-6);
        let (mean, var) = m.mean_var();
        assert!(mean.abs() < 1e-9 && (var - 0.5).abs() < 1e-3);
    }
}

#[test]
fn grid_file_agrees_with_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let g = GaussianState::vacuum(1.0).sample(Window::square(8.0, 128).unwrap()).unwrap();
    fs::write(dir.path().join("vac.txt"), write_phasegrid(&g)).unwrap();
    let o = tomokit(dir.path(), &[
        "tomogram", "--state", "grid-file", "--path", "vac.txt", "--angles", "4", "--nx", "128", "--out", "t.csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t: Tomogram<f64> = read_tomogram_csv(&fs::read_to_string(dir.path().join("t.csv")).unwrap()).unwrap();
    let mut worst = 0f64;
    for m in t.marginals() {
        for k in 0..m.len() {
            worst = worst.max((m.values()[k] - normal_pdf(m.x(k), 0.5)).abs());
        }
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn malformed_frame_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "1 0\n0 x\n").unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--state", "gaussian", "--frames", "bad.txt", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn invert_round_trip_against_reference() {
    let dir = tempfile::tempdir().unwrap();
    let w = Window::square(8.0, 128).unwrap();
    let g = GaussianState::vacuum(1.0).sample(w).unwrap();
    fs::write(dir.path().join("vac.txt"), write_phasegrid(&g)).unwrap();
    let win = ["--window", "8:128"];
    let mut args = vec!["tomogram", "--state", "grid-file", "--path", "vac.txt", "--angles", "64", "--out", "t.csv"];
    args.extend(win);
    assert_eq!(tomokit(dir.path(), &args).status.code(), Some(0));
    let mut args = vec!["invert", "--input", "t.csv", "--out", "back.txt", "--reference", "vac.txt"];
    args.extend(win);
    let o = tomokit(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let back: PhaseGrid<f64> =
        read_phasegrid(&fs::read_to_string(dir.path().join("back.txt")).unwrap(), GridKind::Density).unwrap();
    let l1 = back.l1_distance(&g).unwrap();
    assert!(l1 < 1e-2, "{l1}");
    let line = stdout(&o).lines().find(|l| l.starts_with("l1_to_reference")).map(str::to_owned).unwrap();
    let reported: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((reported - l1).abs() < 1e-12);
}

#[test]
fn too_few_angles_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tomokit(dir.path(), &["tomogram", "--state", "gaussian", "--angles", "4", "--out", "t.csv"]).status.code(), Some(0));
    let o = tomokit(dir.path(), &["invert", "--input", "t.csv", "--out", "g.txt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("coverage"));
}

#[test]
fn classify_the_three_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["--state", "gaussian"], "both"),
        (&["--state", "gaussian", "--sigma", "0.1,0.1,0"], "classical-only"),
        (&["--state", "fock", "--n", "1"], "quantum-only"),
    ];
    for (state, quadrant) in cases {
        let mut args = vec!["classify", "--json"];
        args.extend(state);
        let o = tomokit(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["quadrant"], quadrant);
    }
}

#[test]
fn strict_escalates_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["classify", "--state", "gaussian", "--sigma", "3,3,0", "--dim", "8"];
    assert_eq!(tomokit(dir.path(), &args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(tomokit(dir.path(), &strict).status.code(), Some(3));
}

#[test]
fn dimension_cap_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tomokit"))
        .current_dir(dir.path())
        .env("TOMOKIT_MAX_DIM", "16")
        .args(["classify", "--state", "fock", "--n", "1", "--report", "r.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("capped at 16"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["warnings"][0], "basis truncation 64 capped at 16");
}

#[test]
fn hbar_scan_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["scan", "hbar-scan", "--out", "h.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!((f[2], f[6], f[9]), ("classical-only", "quantum-only", "true"));
    }
}

#[test]
fn cross_scan_boundary_is_hyperbolic() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["scan", "cross-scan", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda_q,lambda_p,classical_admissible,quantum_admissible,universal_quantum_admissible,inside_cross"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 41 * 41);
    let mut inside = 0;
    for r in &rows {
        let (lq, lp): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let prod = (lq * lp).abs();
        if prod == 0.0 {
            assert_eq!(r[5], "true");
            continue;
        }
        // away from round-off on the boundary itself
        if (prod - 1.0).abs() > 1e-9 {
            assert_eq!(r[5] == "true", prod > 1.0, "{r:?}");
            assert_eq!(r[3] == "true", prod < 1.0, "{r:?}");
            assert_eq!(r[4] == "true", prod < 1.0, "{r:?}");
        }
        assert_eq!(r[2], "true");
        inside += (r[5] == "true") as usize;
    }
    assert!(inside > 0 && inside < rows.len());
}

#[test]
fn empty_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["scan", "cross-scan", "--lq", "1:0:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(tomokit(dir.path(), &["classify"]).status.code(), Some(2));
    assert_eq!(tomokit(dir.path(), &["--hbar", "-1", "classify", "--state", "gaussian"]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "tomogram", "--state", "gaussian", "--mean", "0.5,-1", "--sigma", "0.7,0.4,0.1", "--angles", "8", "--out", "t.csv",
        "--report", "r.json",
    ];
    assert_eq!(tomokit(dir.path(), &args).status.code(), Some(0));
    let first = (fs::read(dir.path().join("t.csv")).unwrap(), fs::read(dir.path().join("r.json")).unwrap());
    assert_eq!(tomokit(dir.path(), &args).status.code(), Some(0));
    let second = (fs::read(dir.path().join("t.csv")).unwrap(), fs::read(dir.path().join("r.json")).unwrap());
    assert_eq!(first, second);
    let v: serde_json::Value = serde_json::from_slice(&first.1).unwrap();
    assert_eq!(v["exit_status"], 0);
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
    let t: Tomogram<f64> = read_tomogram_csv(&String::from_utf8(first.0).unwrap()).unwrap();
    let (mean, _) = t.mean_var(&Frame::new(1.0, 0.0).unwrap()).unwrap();
    assert!((mean - 0.5).abs() < 1e-6);
}

#[test]
fn failure_report_is_still_written() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "1 0\n0 0\n").unwrap();
    let o = tomokit(dir.path(), &[
        "tomogram", "--state", "gaussian", "--frames", "bad.txt", "--out", "t.csv", "--report", "r.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["exit_status"], 2);
    assert!(v["results"]["error"].as_str().unwrap().contains("line 2"));
}
