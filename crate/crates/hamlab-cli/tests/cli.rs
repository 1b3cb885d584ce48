//! End-to-end tests of the `hamlab` binary: artifact layout, worked
//! examples, exit codes, locking, dry runs, and byte determinism.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamlab"))
        .args(args)
        .output()
        .expect("spawn hamlab")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn assert_code(out: &Output, want: i32) {
    assert_eq!(
        out.status.code(),
        Some(want),
        "exit code mismatch\nstdout:\n{}\nstderr:\n{}",
        text(&out.stdout),
        text(&out.stderr)
    );
}

#[test]
fn verify_decay_writes_csv_plots_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "verify",
        "decay",
        "--m",
        "2",
        "--n",
        "8,16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);

    let csv = fs::read_to_string(out.join("decay/decay.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,n,d_min,argmin_r,argmin_k,ln_m"));
    assert_eq!(lines.count(), 2, "one row per grid point:\n{csv}");
    assert!(out.join("decay/plot.dat").exists());
    assert!(out.join("decay/plot.plt").exists());
    assert!(
        !out.join(".lock").exists(),
        "lock must be released on success"
    );

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "verify decay");
    assert_eq!(manifest["config"]["m"][0], 2);
    assert_eq!(manifest["suites"][0]["suite"], "decay");
    assert_eq!(manifest["suites"][0]["verdict"], "pass");
    assert_eq!(
        manifest["suites"][0]["tables"][0],
        "decay/decay.csv"
    );
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "nonsense",
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_code(&o, 2);
    let err = text(&o.stderr);
    assert!(err.contains("unknown suite"), "stderr: {err}");
    assert!(err.contains("decay"), "should list known suites: {err}");
}

#[test]
fn threshold_override_flips_exit_code_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // Any positive two-point series has max/median >= 1, so a tiny plateau
    // threshold must flip the dominant suite to a certificate failure.
    let o = run(&[
        "verify",
        "dominant",
        "--m",
        "2",
        "--n",
        "8,16",
        "--threshold",
        "dominant=0.000001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 1);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["suites"][0]["verdict"], "fail");
    assert!(
        !out.join(".lock").exists(),
        "lock must be released even on certificate failure"
    );
}

#[test]
fn eval_delta_lists_sphere_reciprocals() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "eval",
        "M",
        "--input",
        "delta",
        "--m",
        "2",
        "--n",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(out.join("eval/M.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r,value,achiever");
    assert_eq!(lines.len(), 10, "header plus nine radii:\n{csv}");
    // The point mass convolved with every sphere peaks at the matching
    // radius: value 1/|S_r|, achieved by k = r.
    assert_eq!(lines[1], "0,1/1,0");
    assert_eq!(lines[2], "1,1/16,1"); // |S_1| = C(8,1) * 2
    assert_eq!(lines[3], "2,1/112,2"); // |S_2| = C(8,2) * 4
}

#[test]
fn table_bweights_reproduces_the_collision_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "table",
        "bweights",
        "--m",
        "2",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(out.join("table/bweights.csv")).unwrap();
    assert_eq!(csv, "d,value\n0,1/4\n1,1/2\n2,1/4\n");
}

#[test]
fn table_krawtchouk_contains_corner_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "table",
        "krawtchouk",
        "--m",
        "2",
        "--n",
        "4",
        "--precision",
        "exact",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(out.join("table/krawtchouk.csv")).unwrap();
    assert!(csv.starts_with("r,k,value\n"));
    assert_eq!(csv.lines().count(), 26, "header plus 25 entries");
    assert!(csv.contains("0,0,1/1\n"), "kappa_0(0) = 1:\n{csv}");
    assert!(csv.contains(",1/4\n"), "a 1/4 entry appears:\n{csv}");
    assert!(csv.contains(",-1/8\n"), "a -1/8 entry appears:\n{csv}");
}

#[test]
fn table_summand_reports_magnitudes_and_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "table",
        "summand",
        "--m",
        "2",
        "--n",
        "4",
        "--r",
        "2",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(out.join("table/summand.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "j,a_j,ratio_to_next");
    assert!(lines[1].starts_with("0,1/6,"));
    assert!(lines[2].starts_with("1,1/3,"));
    assert_eq!(lines[3], "2,1/24,");
    assert!(
        text(&o.stdout).contains("peak at j = 1"),
        "stdout: {}",
        text(&o.stdout)
    );
}

#[test]
fn dry_run_plans_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never-created");
    let o = run(&[
        "verify",
        "decay",
        "--m",
        "2",
        "--n",
        "8,16",
        "--dry-run",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let stdout = text(&o.stdout);
    assert!(stdout.contains("plan: verify decay"), "stdout: {stdout}");
    assert!(stdout.contains("suites: decay"), "stdout: {stdout}");
    assert!(!out.exists(), "dry run must not touch the filesystem");
}

#[test]
fn dry_run_of_all_lists_every_suite() {
    let o = run(&["verify", "all", "--dry-run"]);
    assert_code(&o, 0);
    let stdout = text(&o.stdout);
    assert!(
        stdout.contains(
            "oracle, dominant, decay, square-sum, reparam, bigkchoice, blbound, \
             transfer, ns, weak11, norms"
        ),
        "stdout: {stdout}"
    );
}

#[test]
fn lock_file_blocks_a_second_invocation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join(".lock"), "12345\n").unwrap();
    let o = run(&[
        "verify",
        "decay",
        "--m",
        "2",
        "--n",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 2);
    assert!(text(&o.stderr).contains(".lock"), "stderr: {}", text(&o.stderr));
    assert!(
        out.join(".lock").exists(),
        "a lock owned by someone else must not be removed"
    );
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "verify".to_string(),
            "blbound".to_string(),
            "--m".to_string(),
            "2".to_string(),
            "--n".to_string(),
            "8,16".to_string(),
            "--out".to_string(),
            out.to_string(),
        ]
    };
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let oa = run(&args(out_a.to_str().unwrap())
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>());
    let ob = run(&args(out_b.to_str().unwrap())
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>());
    assert_code(&oa, 0);
    assert_code(&ob, 0);
    for rel in ["blbound/blbound.csv", "blbound/plot.dat", "blbound/plot.plt"] {
        let a = fs::read(out_a.join(rel)).unwrap();
        let b = fs::read(out_b.join(rel)).unwrap();
        assert_eq!(a, b, "bytes of {rel} differ between identical runs");
    }
}

#[test]
fn malformed_profile_file_reports_its_row() {
    let tmp = tempfile::tempdir().unwrap();
    let profile = tmp.path().join("profile.csv");
    fs::write(&profile, "0,1\n1,zzz\n").unwrap();
    let o = run(&[
        "eval",
        "M",
        "--input",
        profile.to_str().unwrap(),
        "--m",
        "2",
        "--n",
        "4",
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_code(&o, 2);
    assert!(
        text(&o.stderr).contains("row 2"),
        "stderr: {}",
        text(&o.stderr)
    );
}

#[test]
fn exact_eval_past_the_cap_advises_float() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "eval",
        "M",
        "--m",
        "2",
        "--n",
        "300",
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_code(&o, 2);
    assert!(
        text(&o.stderr).contains("--precision float"),
        "stderr: {}",
        text(&o.stderr)
    );
}

#[test]
fn float_eval_of_a_square_function_runs_at_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "eval",
        "Rt:1",
        "--precision",
        "float",
        "--m",
        "2",
        "--n",
        "32",
        "--input",
        "ball:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(out.join("eval/Rt_1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 34, "header plus 33 radii:\n{csv}");
    for line in csv.lines().skip(1) {
        let value = line.split(',').nth(1).unwrap();
        let v: f64 = value.parse().expect("float cell");
        assert!(v.is_finite() && v >= 0.0, "bad value {value}");
    }
}
