use ccch_core::config::parse_config;
use ccch_core::scenario::{records_csv, run_scenario, sweep, ExitStatus};

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ccch-core-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn pde_run_writes_diagnostics_and_snapshots() {
    let dir = scratch("pde");
    let (out, snap) = (dir.join("d.csv"), dir.join("s.csv"));
    let cfg = parse_config(&format!(
        "kind=pde m0=bump(-2,5,1) n0=bump(2,5,1) n_points=512 t_end=0.2 output_every=0.1 \
         output={} snapshots={}",
        out.display(),
        snap.display()
    ))
    .unwrap();
    let rep = run_scenario(&cfg);
    assert_eq!(rep.status, ExitStatus::Ok, "{:?}", rep.message);
    assert_eq!(rep.records.len(), 3);
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text, records_csv(&rep.records, false));
    let snaps = std::fs::read_to_string(snap).unwrap();
    assert_eq!(snaps.matches("# t = ").count(), 3);
    assert_eq!(snaps.lines().filter(|l| l.starts_with("x,u,v,m,n")).count(), 3);
}

#[test]
fn characteristics_run_adds_pullback_column() {
    let cfg = parse_config("kind=characteristics m0=bump(-2,5,1) n0=bump(2,5,1) n_points=2048 t_end=0.1").unwrap();
    let rep = run_scenario(&cfg);
    assert_eq!(rep.status, ExitStatus::Ok, "{:?}", rep.message);
    assert!(rep.records.iter().all(|r| r.pullback_residual.is_some()));
    assert!(records_csv(&rep.records, true).lines().next().unwrap().ends_with(",pullback_residual"));
    assert_eq!(rep.value("support confinement"), Some("PASS"));
}

#[test]
fn complex_run_keeps_conjugate_pair() {
    let cfg = parse_config(
        "kind=complex u0=bump(-2,5,1) u0_imag=bump(2,5,0.1) n_points=512 t_end=0.2",
    )
    .unwrap();
    let rep = run_scenario(&cfg);
    assert_eq!(rep.status, ExitStatus::Ok, "{:?}", rep.message);
    let residual: f64 = rep.value("complex_conjugate residual (max)").unwrap().parse().unwrap();
    assert!(residual < 1e-12);
}

#[test]
fn sweep_is_deterministic_across_thread_caps() {
    let cfg = parse_config("kind=pde m0=bump(-2,5,1) n0=bump(2,5,1) n_points=256 t_end=0.1").unwrap();
    let values = [1e-3, 2e-3, 5e-3];
    let one = sweep(&cfg, "dt", &values, Some(1));
    let many = sweep(&cfg, "dt", &values, None);
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(a.value, b.value);
        assert_eq!(a.report.records, b.report.records);
    }
}
