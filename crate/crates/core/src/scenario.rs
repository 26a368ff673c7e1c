//! Scenario orchestration: build initial data, run the selected pipeline,
//! emit diagnostics CSV and field snapshots, and summarise.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::characteristics::{pullback_residual, support_bounds_m, support_bounds_n, track};
use crate::config::{Kind, ScenarioConfig};
use crate::diagnostics::{
    record, relative_drift, strictly_decreasing, strictly_increasing, support_measure,
    DiagnosticsContext, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, Scalar};
use crate::initial::{build_complex_initial_condition, build_initial_condition};
use crate::par;
use crate::peakon::{co_moving, evolve_peakons, measure_waltz, peakon_hamiltonian, PeakonState};
use crate::solver::{recover_velocity, Mode, PdeState, Solver, SolverOptions, Trajectory};

/// Process exit status of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    ConfigError,
    BlowUp,
    /// Diagnostics could not be trusted: the window is too small.
    DiagnosticsInvalid,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::ConfigError => 1,
            ExitStatus::BlowUp => 2,
            ExitStatus::DiagnosticsInvalid => 3,
        }
    }

    /// Status for a failed operation.
    pub fn of_error(error: &Error) -> Self {
        match error {
            Error::Config { .. } | Error::Contract(_) => ExitStatus::ConfigError,
            Error::BlowUp { .. } | Error::Numeric(_) => ExitStatus::BlowUp,
            Error::Domain(_) | Error::Measurement(_) => ExitStatus::DiagnosticsInvalid,
        }
    }
}

/// Diagnostics CSV columns, in order. `pullback_residual` is present only
/// for characteristics runs.
pub const CSV_COLUMNS: [&str; 18] = [
    "t",
    "H",
    "P",
    "Eu_plus",
    "Eu_minus",
    "Ev_plus",
    "Ev_minus",
    "E_plus",
    "E_minus",
    "supp_m_lo",
    "supp_m_hi",
    "supp_u_lo",
    "supp_u_hi",
    "tail_slope_left",
    "tail_slope_right",
    "max_abs",
    "boundary_contamination",
    "pullback_residual",
];

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x == 0.0 || (x.is_finite() && (1e-4..1e16).contains(&x.abs())) => x.to_string(),
        Some(x) if x.is_finite() => format!("{x:e}"),
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) => if x > 0.0 { "inf".into() } else { "-inf".into() },
        None => "nan".into(),
    }
}

pub fn csv_header(with_pullback: bool) -> String {
    let n = if with_pullback { 18 } else { 17 };
    CSV_COLUMNS[..n].join(",")
}

pub fn csv_row(r: &DiagnosticsRecord, with_pullback: bool) -> String {
    let mut cols = vec![
        num(Some(r.t)),
        num(Some(r.h)),
        num(Some(r.p)),
        num(r.eu_plus),
        num(r.eu_minus),
        num(r.ev_plus),
        num(r.ev_minus),
        num(r.e_plus),
        num(r.e_minus),
        num(r.supp_m.map(|s| s.0)),
        num(r.supp_m.map(|s| s.1)),
        num(r.supp_u.map(|s| s.0)),
        num(r.supp_u.map(|s| s.1)),
        num(r.tail_slope_left),
        num(r.tail_slope_right),
        num(Some(r.max_abs)),
        num(Some(r.boundary_contamination)),
    ];
    if with_pullback {
        cols.push(num(r.pullback_residual));
    }
    cols.join(",")
}

/// The diagnostics table as CSV text.
pub fn records_csv(records: &[DiagnosticsRecord], with_pullback: bool) -> String {
    let mut s = csv_header(with_pullback);
    s.push('\n');
    for r in records {
        s.push_str(&csv_row(r, with_pullback));
        s.push('\n');
    }
    s
}

/// Outcome of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub status: ExitStatus,
    pub records: Vec<DiagnosticsRecord>,
    /// `(quantity, value)` rows of the summary table.
    pub summary: Vec<(String, String)>,
    /// Error or warning explaining a nonzero status.
    pub message: Option<String>,
    pub peakon_trajectory: Option<Vec<PeakonState>>,
}

impl ScenarioReport {
    fn failed(status: ExitStatus, message: String) -> Self {
        ScenarioReport {
            status,
            records: Vec::new(),
            summary: Vec::new(),
            message: Some(message),
            peakon_trajectory: None,
        }
    }

    /// Aligned two-column rendering of the summary.
    pub fn summary_table(&self) -> String {
        let width = self.summary.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k:<width$}  {v}");
        }
        if let Some(m) = &self.message {
            let _ = writeln!(s, "{:<width$}  {m}", "status");
        }
        s
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|r| r.0 == key).map(|r| r.1.as_str())
    }
}

fn verdict(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.into()
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn write_file(path: &str, contents: &str) -> Result<()> {
    if let Some(dir) = Path::new(path).parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::config("output", format!("{path}: {e}")))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::config("output", format!("{path}: {e}")))
}

/// Field snapshots as CSV blocks, each headed by `# t = ...`.
fn snapshot_csv<T: Scalar>(snapshots: &[PdeState<T>]) -> Result<String> {
    let mut s = String::new();
    for snap in snapshots {
        let (u, v) = recover_velocity(snap)?;
        let _ = writeln!(s, "# t = {}", snap.t);
        if T::IS_COMPLEX {
            let _ = writeln!(s, "x,u_re,u_im,v_re,v_im,m_re,m_im,n_re,n_im");
        } else {
            let _ = writeln!(s, "x,u,v,m,n");
        }
        for (j, &x) in snap.grid().nodes().iter().enumerate() {
            let vals = [u.samples()[j], v.samples()[j], snap.m.samples()[j], snap.n.samples()[j]];
            let _ = write!(s, "{x}");
            for val in vals {
                if T::IS_COMPLEX {
                    let c: Complex64 = val.to_complex();
                    let _ = write!(s, ",{},{}", c.re, c.im);
                } else {
                    let _ = write!(s, ",{}", val.re());
                }
            }
            s.push('\n');
        }
        s.push('\n');
    }
    Ok(s)
}

/// Records for each snapshot, computed in parallel.
fn records_for<T: Scalar>(snaps: &[PdeState<T>], ctx: &DiagnosticsContext) -> Result<Vec<DiagnosticsRecord>> {
    par::map_slice(snaps, |s| record(s, ctx)).into_iter().collect()
}

fn pde_summary(cfg: &ScenarioConfig, records: &[DiagnosticsRecord], summary: &mut Vec<(String, String)>) {
    let hs: Vec<f64> = records.iter().map(|r| r.h).collect();
    let ps: Vec<f64> = records.iter().map(|r| r.p).collect();
    let scale = records.first().map_or(1.0, |r| r.max_abs).max(f64::MIN_POSITIVE);
    summary.push(("snapshots".into(), records.len().to_string()));
    if let Some(last) = records.last() {
        summary.push(("t_final".into(), last.t.to_string()));
    }
    summary.push(("H relative drift".into(), sci(relative_drift(&hs, 1e-300))));
    summary.push((
        "P relative drift".into(),
        sci(relative_drift(&ps, 1e-12 * scale)),
    ));
    let valid = records.iter().all(|r| r.moments_valid());
    if valid && records.len() > 1 {
        let ep: Vec<f64> = records.iter().filter_map(|r| r.e_plus).collect();
        let em: Vec<f64> = records.iter().filter_map(|r| r.e_minus).collect();
        summary.push(("E_+ strictly increasing".into(), verdict(strictly_increasing(&ep))));
        summary.push(("E_- strictly decreasing".into(), verdict(strictly_decreasing(&em))));
    } else if !valid {
        summary.push((
            "E_+- monotonicity".into(),
            "n/a (moments invalidated by boundary contamination)".into(),
        ));
    }
    if let Some(last) = records.last() {
        summary.push(("tail slope left (final)".into(), num(last.tail_slope_left)));
        summary.push(("tail slope right (final)".into(), num(last.tail_slope_right)));
        summary.push(("max |m|,|n| (final)".into(), sci(last.max_abs)));
    }
    let worst = records
        .iter()
        .map(|r| r.boundary_contamination)
        .fold(0.0, f64::max);
    summary.push(("boundary contamination (max)".into(), sci(worst)));
    if worst > cfg.tail_tolerance {
        summary.push(("window".into(), "too small for exponential moments".into()));
    }
}

fn finish_pde<T: Scalar>(
    cfg: &ScenarioConfig,
    snapshots: &[PdeState<T>],
    mut records: Vec<DiagnosticsRecord>,
    mut summary: Vec<(String, String)>,
    failure: Option<Error>,
) -> ScenarioReport {
    pde_summary(cfg, &records, &mut summary);
    if let Some(first) = snapshots.first() {
        if first.mode != Mode::Coupled {
            let worst = snapshots.iter().map(|s| s.mode_residual()).fold(0.0, f64::max);
            summary.push((format!("{} residual (max)", first.mode.as_str()), sci(worst)));
        }
    }
    let with_pullback = cfg.kind == Kind::Characteristics;
    let mut status = ExitStatus::Ok;
    let mut message = None;
    if let Some(err) = failure {
        status = ExitStatus::of_error(&err);
        message = Some(format!("{err} (partial output written)"));
    } else if records.iter().any(|r| r.boundary_contamination > cfg.tail_tolerance) {
        status = ExitStatus::DiagnosticsInvalid;
        message = Some("boundary contamination exceeds tail_tolerance; enlarge half_length".into());
    }
    let write = || -> Result<()> {
        if let Some(path) = &cfg.output {
            write_file(path, &records_csv(&records, with_pullback))?;
        }
        if let Some(path) = &cfg.snapshots {
            write_file(path, &snapshot_csv(snapshots)?)?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        status = ExitStatus::ConfigError;
        message = Some(e.to_string());
    }
    if !with_pullback {
        for r in &mut records {
            r.pullback_residual = None;
        }
    }
    summary.push(("exit status".into(), status.code().to_string()));
    ScenarioReport {
        status,
        records,
        summary,
        message,
        peakon_trajectory: None,
    }
}

fn run_pde_generic<T: Scalar>(cfg: &ScenarioConfig, state: PdeState<T>) -> ScenarioReport {
    let ctx = match DiagnosticsContext::from_initial(&state, cfg.epsilon_support, cfg.tail_tolerance) {
        Ok(c) => c,
        Err(e) => return ScenarioReport::failed(ExitStatus::of_error(&e), e.to_string()),
    };
    let solver = Solver::new(SolverOptions {
        dealias: cfg.dealias,
        blowup_threshold: cfg.blowup_threshold,
        ..SolverOptions::default()
    });
    let (traj, failure): (Trajectory<T>, Option<Error>) =
        match solver.evolve(&state, cfg.t_end, cfg.dt, &cfg.output_times(), |_| {}) {
            Ok(t) => (t, None),
            Err(i) => (i.partial, Some(i.error)),
        };
    let records = match records_for(traj.snapshots(), &ctx) {
        Ok(r) => r,
        Err(e) => return ScenarioReport::failed(ExitStatus::of_error(&e), e.to_string()),
    };
    finish_pde(cfg, traj.snapshots(), records, Vec::new(), failure)
}

fn run_characteristics(cfg: &ScenarioConfig, state: PdeState<f64>) -> ScenarioReport {
    let ctx = match DiagnosticsContext::from_initial(&state, cfg.epsilon_support, cfg.tail_tolerance) {
        Ok(c) => c,
        Err(e) => return ScenarioReport::failed(ExitStatus::of_error(&e), e.to_string()),
    };
    let solver = Solver::new(SolverOptions {
        dealias: cfg.dealias,
        blowup_threshold: cfg.blowup_threshold,
        ..SolverOptions::default()
    });
    let (run, failure) = match track(&solver, &state, cfg.t_end, cfg.dt, &cfg.output_times(), cfg.label_stride) {
        Ok(r) => (r, None),
        Err(i) => (i.partial, Some(i.error)),
    };
    let snaps = run.trajectory.snapshots();
    let mut records = match records_for(snaps, &ctx) {
        Ok(r) => r,
        Err(e) => return ScenarioReport::failed(ExitStatus::of_error(&e), e.to_string()),
    };
    let mut summary = Vec::new();
    let initial = &snaps[0];
    let scale = initial.max_abs().max(f64::MIN_POSITIVE);
    let mut worst_pullback = 0.0_f64;
    let mut confined = true;
    let mut min_sign = f64::INFINITY;
    let (decl_m, decl_n) = cfg.ic.supports();
    let decl_m = decl_m.or_else(|| support_measure(&initial.m, ctx.epsilon_m));
    let decl_n = decl_n.or_else(|| support_measure(&initial.n, ctx.epsilon_n));
    let nonneg = initial.m.samples().iter().chain(initial.n.samples()).all(|&v| v >= 0.0);
    let spacing = initial.grid().spacing();
    for (rec, (snap, cs)) in records.iter_mut().zip(snaps.iter().zip(&run.characteristics)) {
        if let Ok(res) = pullback_residual(snap, cs, initial) {
            rec.pullback_residual = Some(res.max());
            worst_pullback = worst_pullback.max(res.max());
        }
        let check = |decl: Option<(f64, f64)>, field: &crate::grid::Field<f64>, eps: f64, flow_m: bool| {
            let (Some((a, b)), Some((lo, hi))) = (decl, support_measure(field, eps)) else {
                return true;
            };
            let bounds = if flow_m { support_bounds_m(cs, a, b) } else { support_bounds_n(cs, a, b) };
            match bounds {
                Ok((pa, pb)) => lo >= pa - spacing && hi <= pb + spacing,
                Err(_) => false,
            }
        };
        confined &= check(decl_m, &snap.m, ctx.epsilon_m, true);
        confined &= check(decl_n, &snap.n, ctx.epsilon_n, false);
        if nonneg {
            let lowest = snap.m.samples().iter().chain(snap.n.samples()).copied().fold(f64::INFINITY, f64::min);
            min_sign = min_sign.min(lowest / scale);
        }
    }
    summary.push(("pullback residual / max|m0,n0| (max)".into(), sci(worst_pullback / scale)));
    summary.push(("support confinement".into(), verdict(confined)));
    if nonneg {
        summary.push(("min m,n / max|m0,n0|".into(), sci(min_sign)));
        summary.push(("sign preservation (>= -1e-8)".into(), verdict(min_sign >= -1e-8)));
    }
    if let Some(cs) = run.characteristics.last() {
        let (dp, dx) = cs.jacobian_fd_discrepancy();
        summary.push(("Jacobian vs finite difference (final)".into(), sci(dp.max(dx))));
    }
    finish_pde(cfg, snaps, records, summary, failure)
}

fn peakon_csv(samples: &[PeakonState]) -> String {
    let Some(first) = samples.first() else {
        return String::new();
    };
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=first.q.len()).map(|i| format!("q_{i}")));
    cols.extend((1..=first.q.len()).map(|i| format!("m_{i}")));
    cols.extend((1..=first.r.len()).map(|i| format!("r_{i}")));
    cols.extend((1..=first.r.len()).map(|i| format!("n_{i}")));
    cols.push("h".into());
    cols.push("total_momentum".into());
    let mut s = cols.join(",");
    s.push('\n');
    for p in samples {
        let mut row = vec![p.t.to_string()];
        row.extend(p.q.iter().chain(&p.m_amp).chain(&p.r).chain(&p.n_amp).map(f64::to_string));
        row.push(peakon_hamiltonian(p).to_string());
        row.push(p.total_momentum().to_string());
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// States nearest to each output time (plus the first and last).
fn sample_trajectory(traj: &[PeakonState], times: &[f64]) -> Vec<PeakonState> {
    let mut out = vec![traj[0].clone()];
    for &t in times {
        let j = traj.partition_point(|s| s.t < t);
        let j = if j > 0 && (j == traj.len() || (t - traj[j - 1].t) < (traj[j].t - t)) { j - 1 } else { j };
        if j < traj.len() && traj[j].t > out.last().map_or(f64::NEG_INFINITY, |s| s.t) {
            out.push(traj[j].clone());
        }
    }
    let last = traj.last().expect("nonempty");
    if out.last().map(|s| s.t) != Some(last.t) {
        out.push(last.clone());
    }
    out
}

fn run_peakons(cfg: &ScenarioConfig) -> ScenarioReport {
    let p = &cfg.peakons;
    let state = match PeakonState::new(0.0, p.q.clone(), p.m_amps.clone(), p.r.clone(), p.n_amps.clone()) {
        Ok(s) => s,
        Err(e) => return ScenarioReport::failed(ExitStatus::ConfigError, e.to_string()),
    };
    let (traj, failure) = match evolve_peakons(&state, cfg.t_end, cfg.dt) {
        Ok(t) => (t, None),
        Err(i) => (i.partial, Some(i.error)),
    };
    let mut summary = Vec::new();
    let totals: Vec<f64> = traj.iter().map(PeakonState::total_momentum).collect();
    let hs: Vec<f64> = traj.iter().map(peakon_hamiltonian).collect();
    let t0 = totals[0];
    summary.push(("steps".into(), (traj.len() - 1).to_string()));
    summary.push(("t_final".into(), traj.last().map_or(0.0, |s| s.t).to_string()));
    summary.push(("sum m + sum n (initial)".into(), t0.to_string()));
    summary.push((
        "sum m + sum n drift (max abs)".into(),
        sci(totals.iter().map(|v| (v - t0).abs()).fold(0.0, f64::max)),
    ));
    summary.push(("h relative drift".into(), sci(relative_drift(&hs, 1e-300))));
    if state.q.len() == 1 && state.r.len() == 1 {
        match measure_waltz(&traj) {
            Ok(w) => {
                summary.push(("waltz period".into(), format!("{:.9}", w.period)));
                summary.push(("swap_error".into(), sci(w.swap_error)));
            }
            Err(e) => {
                summary.push(("waltz period".into(), format!("n/a ({e})")));
            }
        }
    }
    let sampled = sample_trajectory(&traj, &cfg.output_times());
    let mut status = ExitStatus::Ok;
    let mut message = None;
    if let Some(err) = failure {
        status = ExitStatus::of_error(&err);
        message = Some(format!("{err} (partial output written)"));
    }
    let write = || -> Result<()> {
        if let Some(path) = &cfg.output {
            write_file(path, &peakon_csv(&sampled))?;
        }
        if let Some(path) = &cfg.snapshots {
            write_file(path, &peakon_csv(&co_moving(&sampled)))?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        status = ExitStatus::ConfigError;
        message = Some(e.to_string());
    }
    summary.push(("exit status".into(), status.code().to_string()));
    ScenarioReport {
        status,
        records: Vec::new(),
        summary,
        message,
        peakon_trajectory: Some(traj),
    }
}

/// Builds the initial PDE state described by a config.
pub fn initial_state(cfg: &ScenarioConfig, grid: &Grid) -> Result<PdeState<f64>> {
    let (m0, n0) = build_initial_condition(&cfg.ic, grid)?;
    match cfg.mode {
        Mode::ChReduction => PdeState::ch_reduction(m0),
        Mode::Coupled => PdeState::coupled(m0, n0),
        Mode::ComplexConjugate => Err(Error::config("mode", "complex_conjugate needs kind=complex")),
    }
}

/// Checks everything short of running: grid, initial data, diagnostics
/// thresholds.
pub fn check_scenario(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.kind == Kind::Peakon {
        let p = &cfg.peakons;
        PeakonState::new(0.0, p.q.clone(), p.m_amps.clone(), p.r.clone(), p.n_amps.clone())?;
        return Ok(());
    }
    let grid = cfg.grid()?;
    if cfg.kind == Kind::Complex {
        let m = build_complex_initial_condition(&cfg.ic, &grid)?;
        PdeState::complex_conjugate(m)?;
    } else {
        initial_state(cfg, &grid)?;
    }
    Ok(())
}

/// Runs a scenario, writing any configured output files.
pub fn run_scenario(cfg: &ScenarioConfig) -> ScenarioReport {
    if cfg.kind == Kind::Peakon {
        return run_peakons(cfg);
    }
    let grid = match cfg.grid() {
        Ok(g) => g,
        Err(e) => return ScenarioReport::failed(ExitStatus::ConfigError, e.to_string()),
    };
    let fail = |e: Error| ScenarioReport::failed(ExitStatus::of_error(&e), e.to_string());
    match cfg.kind {
        Kind::Complex => match build_complex_initial_condition(&cfg.ic, &grid)
            .and_then(PdeState::complex_conjugate)
        {
            Ok(s) => run_pde_generic::<Complex64>(cfg, s),
            Err(e) => fail(e),
        },
        Kind::Characteristics => match initial_state(cfg, &grid) {
            Ok(s) => run_characteristics(cfg, s),
            Err(e) => fail(e),
        },
        _ => match initial_state(cfg, &grid) {
            Ok(s) => run_pde_generic::<f64>(cfg, s),
            Err(e) => fail(e),
        },
    }
}

/// `key=a:b:n` as the key and `n` evenly spaced values from `a` to `b`.
pub fn parse_vary(spec: &str) -> Result<(String, Vec<f64>)> {
    let bad = |m: &str| Error::config("vary", format!("`{spec}`: {m} (expected key=a:b:n)"));
    let (key, range) = spec.split_once('=').ok_or_else(|| bad("missing `=`"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("need three fields"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad("bad end"))?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad("count must be positive and bounds finite"));
    }
    let values = if n == 1 {
        vec![a]
    } else {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    };
    Ok((key.trim().to_string(), values))
}

fn suffixed(path: &str, index: usize) -> String {
    let p = PathBuf::from(path);
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match p.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}_{index}.{ext}"),
        None => format!("{stem}_{index}"),
    };
    p.with_file_name(name).to_string_lossy().into_owned()
}

/// One member of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: f64,
    pub report: ScenarioReport,
}

/// Runs the base scenario once per value of `key`, in parallel on at most
/// `threads` workers. Output paths get a `_<index>` suffix.
pub fn sweep(base: &ScenarioConfig, key: &str, values: &[f64], threads: Option<usize>) -> Vec<SweepRun> {
    let indexed: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    par::with_thread_cap(threads, || {
        par::map_slice(&indexed, |&(i, value)| {
            let text = if key == "n_points" || key == "label_stride" {
                format!("{}", value.round() as i64)
            } else {
                value.to_string()
            };
            let report = match base.with_override(key, &text) {
                Ok(mut cfg) => {
                    cfg.output = cfg.output.as_deref().map(|p| suffixed(p, i));
                    cfg.snapshots = cfg.snapshots.as_deref().map(|p| suffixed(p, i));
                    run_scenario(&cfg)
                }
                Err(e) => ScenarioReport::failed(ExitStatus::ConfigError, e.to_string()),
            };
            SweepRun { value, report }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn header_has_fixed_order() {
        assert_eq!(
            csv_header(false),
            "t,H,P,Eu_plus,Eu_minus,Ev_plus,Ev_minus,E_plus,E_minus,supp_m_lo,supp_m_hi,\
             supp_u_lo,supp_u_hi,tail_slope_left,tail_slope_right,max_abs,boundary_contamination"
        );
        assert!(csv_header(true).ends_with(",pullback_residual"));
    }

    #[test]
    fn zero_duration_run_has_single_record() {
        let cfg = parse_config("kind=pde m0=bump(-2,3,1) n0=bump(2,3,1) t_end=0 n_points=256").unwrap();
        let rep = run_scenario(&cfg);
        assert_eq!(rep.status, ExitStatus::Ok, "{:?}", rep.message);
        assert_eq!(rep.records.len(), 1);
    }

    #[test]
    fn blowup_is_exit_two_with_partial_records() {
        let cfg = parse_config(
            "kind=pde m0=bump(-2,3,1) n0=bump(2,3,1) t_end=1 n_points=256 blowup_threshold=0.1",
        )
        .unwrap();
        let rep = run_scenario(&cfg);
        assert_eq!(rep.status, ExitStatus::BlowUp);
        assert_eq!(rep.records.len(), 1);
        assert!(rep.message.unwrap().contains("blow-up"));
    }

    #[test]
    fn small_window_is_exit_three() {
        let cfg = parse_config("kind=pde m0=bump(0,4,1) half_length=5 n_points=256 t_end=0").unwrap();
        assert_eq!(run_scenario(&cfg).status, ExitStatus::DiagnosticsInvalid);
    }

    #[test]
    fn peakon_summary_reports_momentum() {
        let cfg = parse_config("kind=peakon m_amps=10 n_amps=1 q=0 r=0 t_end=5").unwrap();
        let rep = run_scenario(&cfg);
        assert_eq!(rep.status, ExitStatus::Ok);
        assert_eq!(rep.value("sum m + sum n (initial)"), Some("11"));
        let period: f64 = rep.value("waltz period").unwrap().parse().unwrap();
        assert!((period - 3.6).abs() < 1e-6);
    }

    #[test]
    fn vary_parsing() {
        let (k, v) = parse_vary("dt=0.001:0.002:3").unwrap();
        assert_eq!(k, "dt");
        assert_eq!(v, vec![0.001, 0.0015, 0.002]);
        assert!(parse_vary("dt=1:2").is_err());
        assert!(parse_vary("dt").is_err());
        assert_eq!(suffixed("dir/out.csv", 2), "dir/out_2.csv");
    }
}
