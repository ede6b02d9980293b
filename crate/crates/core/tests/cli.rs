use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vortex_blob::io::{read_csv, read_snapshot, write_snapshot};
use vortex_blob::{Vec2, VortexSheet};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vortex-blob"));
    c.env_remove("VORTEX_BLOB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_zero_length_run_writes_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"kind": "loaded_wing", "n_nodes": 21, "eps": 0.1, "t_final": 0.0, "output_dir": {:?}}}"#,
            p(&out_dir)
        ),
    );
    let out = run(&["simulate", p(&cfg)]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(files(&out_dir), ["invariants.csv", "snap_t0000.0000.bin"]);
    let (header, rows) = read_csv(&out_dir.join("invariants.csv")).unwrap();
    assert_eq!(header, ["t", "H", "Wx", "Wy", "rel_drift_H", "rel_drift_W"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4], 0.0);
}

#[test]
fn simulate_cadence_and_output_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kind": "fuselage_flap", "n_nodes": 41, "eps": 0.2, "t_final": 0.3}"#,
    );
    let out_dir = dir.path().join("run");
    let out = run(&["simulate", p(&cfg), "--output-dir", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(
        files(&out_dir),
        [
            "invariants.csv",
            "snap_t0000.0000.bin",
            "snap_t0000.1000.bin",
            "snap_t0000.2000.bin",
            "snap_t0000.3000.bin"
        ]
    );
    let last = read_snapshot(&out_dir.join("snap_t0000.3000.bin")).unwrap();
    assert_eq!(last.len(), 41);
    assert!((last.time() - 0.3).abs() < 1e-15);
}

#[test]
fn simulate_rejects_bad_config_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    for body in [
        format!(
            r#"{{"kind": "loaded_wing", "n_nodes": 21, "eps": 0.0, "t_final": 1.0, "output_dir": {:?}}}"#,
            p(&out_dir)
        ),
        format!(
            r#"{{"kind": "loaded_wing", "n_nodes": 21, "eps": 0.1, "t_final": 1.0, "bogus": 1, "output_dir": {:?}}}"#,
            p(&out_dir)
        ),
        "{ not json".to_string(),
    ] {
        let cfg = write_config(dir.path(), &body);
        let out = run(&["simulate", p(&cfg)]);
        assert_eq!(code(&out), 1, "{body}: {out:?}");
        assert!(!out_dir.exists());
    }
    let out = run(&["simulate", p(&dir.path().join("missing.json"))]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_drift_violation_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"kind": "loaded_wing", "n_nodes": 41, "eps": 0.1, "t_final": 0.5, "dt": 0.05, "drift_tol": 1e-300, "output_dir": {:?}}}"#,
            p(dir.path())
        ),
    );
    let out = run(&["simulate", p(&cfg)]);
    assert_eq!(code(&out), 4, "{out:?}");
    let (_, rows) = read_csv(&dir.path().join("invariants.csv")).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn init_writes_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"kind": "fuselage_flap", "n_nodes": 101, "eps": 0.05, "t_final": 3.0, "output_dir": {:?}}}"#,
            p(dir.path())
        ),
    );
    let out = run(&["init", p(&cfg)]);
    assert_eq!(code(&out), 0, "{out:?}");
    let s = read_snapshot(&dir.path().join("snap_t0000.0000.bin")).unwrap();
    assert_eq!((s.len(), s.eps(), s.time()), (101, 0.05, 0.0));
}

fn init_lw(dir: &Path, n_nodes: usize) -> PathBuf {
    let cfg = write_config(
        dir,
        &format!(
            r#"{{"kind": "loaded_wing", "n_nodes": {n_nodes}, "eps": 0.1, "t_final": 0.0, "output_dir": {:?}}}"#,
            p(dir)
        ),
    );
    assert_eq!(code(&run(&["init", p(&cfg)])), 0);
    dir.join("snap_t0000.0000.bin")
}

#[test]
fn analyze_global_single_vortex() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("one.bin");
    let sheet = VortexSheet::new(
        vec![0.0, PI],
        vec![Vec2::new(0.3, 0.2), Vec2::new(0.3, 0.2)],
        vec![-0.7, 0.0],
        0.1,
        0.0,
    )
    .unwrap();
    write_snapshot(&snap, &sheet).unwrap();
    let out = run(&[
        "analyze-global",
        p(&snap),
        "--nd",
        "64",
        "--output-dir",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (header, rows) = read_csv(&dir.path().join("maxfn_t0000.0000.csv")).unwrap();
    assert_eq!(header, ["r", "M_r"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[1] == 0.7));
}

#[test]
fn analyze_global_tip_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 20001);
    let out = run(&["analyze-global", p(&snap), "--output-dir", p(dir.path())]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("exponent")).unwrap();
    let beta: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((beta - 0.5).abs() < 0.05, "{line}");
}

#[test]
fn analyze_global_precondition_and_io_failures() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 21);
    let out = run(&["analyze-global", p(&snap), "--nd", "64", "--levels", "8"]);
    assert_eq!(code(&out), 1);
    let out = run(&["analyze-global", p(&dir.path().join("nope.bin"))]);
    assert_eq!(code(&out), 2);
    let bad = dir.path().join("bad.bin");
    let mut bytes = fs::read(&snap).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&bad, bytes).unwrap();
    let out = run(&["analyze-global", p(&bad)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_local_tracks_points() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 201);
    let sheet = read_snapshot(&snap).unwrap();
    let out_dir = dir.path().join("local");
    let out = run(&[
        "analyze-local",
        p(&snap),
        "--alphas",
        "0.9pi,0.965pi,pi",
        "--output-dir",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(
        files(&out_dir),
        [
            "local_t0000.0000_a0.9000pi.csv",
            "local_t0000.0000_a0.9650pi.csv",
            "local_t0000.0000_a1.0000pi.csv",
            "tracked_t0000.0000.csv"
        ]
    );
    let (header, rows) = read_csv(&out_dir.join("local_t0000.0000_a1.0000pi.csv")).unwrap();
    assert_eq!(header, ["r", "local_mass"]);
    assert_eq!(rows.len(), 24);
    assert!(rows[0][1] >= sheet.weights()[200].abs());
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
    let (_, tracked) = read_csv(&out_dir.join("tracked_t0000.0000.csv")).unwrap();
    assert_eq!(tracked[2][1], 200.0);
    assert_eq!(tracked[2][3], sheet.positions()[200].x);

    // a disc too small to reach the neighbours holds only the tip vortex
    let out = run(&[
        "analyze-local",
        p(&snap),
        "--alphas",
        "pi",
        "--radii",
        "1e-7,1e-3",
        "--output-dir",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (_, rows) = read_csv(&out_dir.join("local_t0000.0000_a1.0000pi.csv")).unwrap();
    assert_eq!(rows[0][1], sheet.weights()[200].abs());
}

#[test]
fn analyze_local_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 21);
    assert_eq!(code(&run(&["analyze-local", p(&snap), "--alphas", ""])), 1);
    assert_eq!(code(&run(&["analyze-local", p(&snap)])), 1);
    assert_eq!(
        code(&run(&["analyze-local", p(&snap), "--alphas", "1.5pi"])),
        1
    );
    assert_eq!(
        code(&run(&[
            "analyze-local",
            p(&snap),
            "--alphas",
            "pi",
            "--radii",
            "0.5,0.1"
        ])),
        1
    );
}

#[test]
fn structure_disc_fixture_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "structure",
        "--fixture",
        "disc",
        "--radii",
        "0.5",
        "--nd",
        "128",
        "--grid-n",
        "128",
        "--output-dir",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (header, rows) = read_csv(&dir.path().join("structure_disc.csv")).unwrap();
    assert_eq!(header[..4], ["r", "s2_direct", "s2_identity", "bound_rhs"]);
    let (d, i, b) = (rows[0][1].powi(2), rows[0][2].powi(2), rows[0][3]);
    assert!((d - i).abs() <= 0.02 * d, "{d} vs {i}");
    assert!(d <= b);
}

#[test]
fn structure_sheet_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 201);
    let out = run(&[
        "structure",
        p(&snap),
        "--radii",
        "0.05,0.1,0.2",
        "--grid-n",
        "32",
        "--nd",
        "256",
        "--output-dir",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (_, rows) = read_csv(&dir.path().join("structure_t0000.0000.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!(
            row[1] > 0.0 && row[2] > 0.0 && row[3].is_finite(),
            "{row:?}"
        );
    }
    assert_eq!(code(&run(&["structure", p(&snap), "--radii", ""])), 1);
}

#[test]
fn verify_passes_and_negative_controls_fail() {
    let out = run(&["verify"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("0 failed"));

    let out = run(&["verify", "--tamper-sigma", "1.01"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains("FAIL  sigma(1/2) closed form"));

    let out = run(&["verify", "--sigma-n-quad", "8"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains("FAIL  sigma disc average"));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let snap = init_lw(dir.path(), 21);
    let out = bin()
        .env("VORTEX_BLOB_THREADS", "2")
        .args([
            "analyze-global",
            p(&snap),
            "--nd",
            "32",
            "--output-dir",
            p(dir.path()),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let out = bin()
        .env("VORTEX_BLOB_THREADS", "lots")
        .args(["verify"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&[])), 1);
}
