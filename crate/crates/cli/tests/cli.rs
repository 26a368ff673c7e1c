use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ccch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccch")).args(args).output().expect("spawn ccch")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ccch-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn zero_duration_run_writes_single_row() {
    let dir = scratch("zero");
    let csv = dir.join("d.csv");
    let cfg = write_config(
        &dir,
        &format!("kind=pde\nm0=bump(-2,3,1)\nn0=bump(2,3,1)\nt_end=0\noutput={}\n", csv.display()),
    );
    let out = ccch(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("t,H,P,Eu_plus"));
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn run_is_byte_reproducible() {
    let dir = scratch("repro");
    let csv = dir.join("d.csv");
    let cfg = write_config(
        &dir,
        &format!(
            "kind=pde\nm0=bump(-2,3,1)\nn0=bump(2,3,1)\nn_points=512\nt_end=0.2\noutput={}\n",
            csv.display()
        ),
    );
    assert_eq!(ccch(&["run", &cfg]).status.code(), Some(0));
    let first = std::fs::read(&csv).unwrap();
    assert_eq!(ccch(&["run", &cfg]).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&csv).unwrap());
}

#[test]
fn nonnegative_bumps_report_monotone_moments() {
    let dir = scratch("mono");
    let cfg = write_config(&dir, "kind=pde\nm0=bump(-2,3,1)\nn0=bump(2,3,1)\nn_points=512\nt_end=0.5\n");
    let out = ccch(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("E_+ strictly increasing       PASS"), "{}", stdout(&out));
}

#[test]
fn blowup_threshold_gives_exit_two() {
    let dir = scratch("blowup");
    let cfg = write_config(
        &dir,
        "kind=pde\nm0=bump(-2,3,1)\nn0=bump(2,3,1)\nn_points=256\nt_end=1\nblowup_threshold=0.1\n",
    );
    let out = ccch(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));
}

#[test]
fn small_window_gives_exit_three() {
    let dir = scratch("window");
    let cfg = write_config(&dir, "kind=pde\nm0=bump(0,4,1)\nhalf_length=5\nn_points=256\nt_end=0\n");
    assert_eq!(ccch(&["run", &cfg]).status.code(), Some(3));
}

#[test]
fn check_rejects_bad_grid_with_key_and_line() {
    let dir = scratch("check");
    let cfg = write_config(&dir, "kind=pde\nm0=bump(0,1,1)\nn_points=1000\n");
    let out = ccch(&["check", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_points") && err.contains("line 3"), "{err}");
    let good = write_config(&dir, "kind=peakon m_amps=10 n_amps=1 q=0 r=5");
    assert_eq!(ccch(&["check", &good]).status.code(), Some(0));
}

#[test]
fn missing_config_is_config_error() {
    assert_eq!(ccch(&["run", "/nonexistent/ccch.cfg"]).status.code(), Some(1));
}

#[test]
fn peakons_verb_reports_conserved_total() {
    let dir = scratch("peakons");
    let csv = dir.join("p.csv");
    let out = ccch(&[
        "peakons", "--m1", "10", "--n1", "1", "--q0", "-2.5", "--r0", "2.5", "--t-end", "2", "--dt", "1e-3",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sum m + sum n (initial)        11"), "{}", stdout(&out));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,q_1,m_1,r_1,n_1,h,total_momentum\n"));
}

#[test]
fn sweep_runs_every_value() {
    let dir = scratch("sweep");
    let csv = dir.join("d.csv");
    let cfg = write_config(
        &dir,
        &format!(
            "kind=pde\nm0=bump(-2,3,1)\nn0=bump(2,3,1)\nn_points=256\nt_end=0.1\noutput={}\n",
            csv.display()
        ),
    );
    let out = Command::new(env!("CARGO_BIN_EXE_ccch"))
        .args(["sweep", &cfg, "--vary", "dt=0.001:0.002:3"])
        .env("CCCH_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 4);
    for i in 0..3 {
        assert!(dir.join(format!("d_{i}.csv")).exists());
    }
    let bad = ccch(&["sweep", &cfg, "--vary", "bogus=1:2:2"]);
    assert_eq!(bad.status.code(), Some(1));
}
