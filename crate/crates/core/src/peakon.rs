//! Two interacting peakon families.
//!
//! Substituting `m = sum_a m_a delta(x - q_a)`, `n = sum_b n_b delta(x - r_b)`
//! into the momentum equations (weak form, see `docs/peakon_derivation.md`)
//! gives, with `K(x) = exp(-|x|)/2`,
//!
//! ```text
//! dq_a/dt =  sum_b n_b K(q_a - r_b)      dm_a/dt = -m_a sum_b n_b K'(q_a - r_b)
//! dr_b/dt =  sum_a m_a K(r_b - q_a)      dn_b/dt = -n_b sum_a m_a K'(r_b - q_a)
//! ```
//!
//! with `K'(0) = 0`. The right-hand side has a kink whenever an m-peakon
//! passes an n-peakon, so the integrator freezes the side of each pair for
//! the duration of a step and splits steps at crossings.

use crate::error::{Error, Interrupted, Result};
use crate::grid::{Field, Grid};
use crate::kernel::{green_kernel_eval, line_kernel, line_kernel_derivative};
use crate::par;

/// Positions and amplitudes of both families at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakonState {
    pub t: f64,
    pub q: Vec<f64>,
    pub m_amp: Vec<f64>,
    pub r: Vec<f64>,
    pub n_amp: Vec<f64>,
}

/// Time derivative of a [`PeakonState`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeakonRate {
    pub q: Vec<f64>,
    pub m_amp: Vec<f64>,
    pub r: Vec<f64>,
    pub n_amp: Vec<f64>,
}

impl PeakonState {
    pub fn new(t: f64, q: Vec<f64>, m_amp: Vec<f64>, r: Vec<f64>, n_amp: Vec<f64>) -> Result<Self> {
        if q.len() != m_amp.len() || r.len() != n_amp.len() {
            return Err(Error::Contract(format!(
                "peakon lengths disagree: |q| = {}, |m| = {}, |r| = {}, |n| = {}",
                q.len(),
                m_amp.len(),
                r.len(),
                n_amp.len()
            )));
        }
        let state = PeakonState { t, q, m_amp, r, n_amp };
        if !state.is_finite() {
            return Err(Error::Numeric("peakon state is not finite".into()));
        }
        Ok(state)
    }

    /// One m-peakon and one n-peakon.
    pub fn pair(m1: f64, n1: f64, q0: f64, r0: f64) -> Result<Self> {
        Self::new(0.0, vec![q0], vec![m1], vec![r0], vec![n1])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .q
                .iter()
                .chain(&self.m_amp)
                .chain(&self.r)
                .chain(&self.n_amp)
                .all(|v| v.is_finite())
    }

    /// `sum m_a + sum n_b`.
    pub fn total_momentum(&self) -> f64 {
        self.m_amp.iter().sum::<f64>() + self.n_amp.iter().sum::<f64>()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.m_amp
            .iter()
            .chain(&self.n_amp)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Exchanges the two families.
    pub fn swapped(&self) -> PeakonState {
        PeakonState {
            t: self.t,
            q: self.r.clone(),
            m_amp: self.n_amp.clone(),
            r: self.q.clone(),
            n_amp: self.m_amp.clone(),
        }
    }

    fn axpy(&self, scale: f64, rate: &PeakonRate) -> PeakonState {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + scale * y).collect();
        PeakonState {
            t: self.t + scale,
            q: add(&self.q, &rate.q),
            m_amp: add(&self.m_amp, &rate.m_amp),
            r: add(&self.r, &rate.r),
            n_amp: add(&self.n_amp, &rate.n_amp),
        }
    }
}

/// Side of each (m-peakon, n-peakon) pair: the sign of `q_a - r_b` the
/// kernel is evaluated with. 0 means "exactly at a collision".
type Sides = Vec<Vec<i8>>;

/// `K` and `K'` on a fixed side of the kink.
fn sided_kernel(z: f64, side: i8) -> (f64, f64) {
    match side {
        0 => (line_kernel(z), line_kernel_derivative(z)),
        s => {
            let s = f64::from(s);
            let e = 0.5 * (-s * z).exp();
            (e, -s * e)
        }
    }
}

fn rhs_with_sides(ps: &PeakonState, sides: &Sides) -> PeakonRate {
    let (mm, nn) = (ps.q.len(), ps.r.len());
    let mut rate = PeakonRate {
        q: vec![0.0; mm],
        m_amp: vec![0.0; mm],
        r: vec![0.0; nn],
        n_amp: vec![0.0; nn],
    };
    for a in 0..mm {
        for b in 0..nn {
            let (k, dk) = sided_kernel(ps.q[a] - ps.r[b], sides[a][b]);
            rate.q[a] += ps.n_amp[b] * k;
            rate.m_amp[a] -= ps.m_amp[a] * ps.n_amp[b] * dk;
            rate.r[b] += ps.m_amp[a] * k;
            rate.n_amp[b] += ps.m_amp[a] * ps.n_amp[b] * dk;
        }
    }
    rate
}

fn natural_sides(ps: &PeakonState) -> Sides {
    ps.q.iter()
        .map(|q| ps.r.iter().map(|r| sign_of(q - r)).collect())
        .collect()
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// The peakon vector field, with `K'(0) = 0` at collisions.
pub fn peakon_rhs(ps: &PeakonState) -> Result<PeakonRate> {
    if !ps.is_finite() {
        return Err(Error::Numeric("peakon state is not finite".into()));
    }
    let rate = rhs_with_sides(ps, &natural_sides(ps));
    let finite = rate
        .q
        .iter()
        .chain(&rate.m_amp)
        .chain(&rate.r)
        .chain(&rate.n_amp)
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::Numeric("peakon rate is not finite".into()));
    }
    Ok(rate)
}

/// `h = sum_{a,b} m_a n_b K(q_a - r_b)`.
pub fn peakon_hamiltonian(ps: &PeakonState) -> f64 {
    let mut h = 0.0;
    for (q, m) in ps.q.iter().zip(&ps.m_amp) {
        for (r, n) in ps.r.iter().zip(&ps.n_amp) {
            h += m * n * line_kernel(q - r);
        }
    }
    h
}

/// Velocities `u = sum m_a p_L(x - q_a)` and `v = sum n_b p_L(x - r_b)`
/// sampled on the grid with the periodized kernel.
pub fn peakon_fields(ps: &PeakonState, grid: &Grid) -> Result<(Field<f64>, Field<f64>)> {
    let l = grid.half_length();
    for &x in ps.q.iter().chain(&ps.r) {
        if !(x > -l && x < l) {
            return Err(Error::Domain(format!(
                "peakon position {x} outside the window (-{l}, {l})"
            )));
        }
    }
    let field = |pos: &[f64], amp: &[f64]| {
        Field::from_fn(grid, |x| {
            pos.iter()
                .zip(amp)
                .map(|(p, a)| a * green_kernel_eval(grid.wrap(x - p), l))
                .sum()
        })
    };
    Ok((field(&ps.q, &ps.m_amp), field(&ps.r, &ps.n_amp)))
}

/// Pairs closer than this are treated as colliding when choosing sides.
const COLLISION_GAP: f64 = 1e-12;
/// Upper bound on crossings resolved inside one step.
const MAX_SPLITS: usize = 16;

fn sides_for_step(ps: &PeakonState, direction: f64) -> Sides {
    let mut sides = natural_sides(ps);
    let mut rate = None;
    for a in 0..ps.q.len() {
        for b in 0..ps.r.len() {
            let z = ps.q[a] - ps.r[b];
            if z.abs() <= COLLISION_GAP * (1.0 + ps.q[a].abs() + ps.r[b].abs()) {
                // At a collision the relative velocity is side-independent
                // and decides which side the pair is about to occupy.
                let rate = rate.get_or_insert_with(|| rhs_with_sides(ps, &natural_sides(ps)));
                sides[a][b] = sign_of(direction * (rate.q[a] - rate.r[b]));
            }
        }
    }
    sides
}

fn rk4_frozen(ps: &PeakonState, sides: &Sides, dt: f64) -> PeakonState {
    let k1 = rhs_with_sides(ps, sides);
    let k2 = rhs_with_sides(&ps.axpy(0.5 * dt, &k1), sides);
    let k3 = rhs_with_sides(&ps.axpy(0.5 * dt, &k2), sides);
    let k4 = rhs_with_sides(&ps.axpy(dt, &k3), sides);
    let comb = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len())
            .map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * (b[i] + c[i]) + d[i]))
            .collect()
    };
    PeakonState {
        t: ps.t + dt,
        q: comb(&ps.q, &k1.q, &k2.q, &k3.q, &k4.q),
        m_amp: comb(&ps.m_amp, &k1.m_amp, &k2.m_amp, &k3.m_amp, &k4.m_amp),
        r: comb(&ps.r, &k1.r, &k2.r, &k3.r, &k4.r),
        n_amp: comb(&ps.n_amp, &k1.n_amp, &k2.n_amp, &k3.n_amp, &k4.n_amp),
    }
}

fn crossed_pairs(trial: &PeakonState, sides: &Sides) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (a, row) in sides.iter().enumerate() {
        for (b, &s) in row.iter().enumerate() {
            if s != 0 && f64::from(s) * (trial.q[a] - trial.r[b]) < 0.0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// One RK4 step of size `dt` (negative integrates backwards). Steps that
/// carry a pair across a collision are split at the crossing, located by
/// bisection, so each sub-step sees a smooth vector field.
pub fn advance(ps: &PeakonState, dt: f64) -> Result<PeakonState> {
    if !dt.is_finite() {
        return Err(Error::Contract(format!("dt must be finite, got {dt}")));
    }
    if !ps.is_finite() {
        return Err(Error::Numeric("peakon state is not finite".into()));
    }
    let target = ps.t + dt;
    let mut cur = ps.clone();
    let mut remaining = dt;
    let mut splits = 0;
    while remaining != 0.0 {
        let sides = sides_for_step(&cur, remaining.signum());
        let trial = rk4_frozen(&cur, &sides, remaining);
        let crossed = crossed_pairs(&trial, &sides);
        if crossed.is_empty() || splits >= MAX_SPLITS {
            cur = trial;
            break;
        }
        let mut theta = 1.0_f64;
        for &(a, b) in &crossed {
            let s = f64::from(sides[a][b]);
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let probe = rk4_frozen(&cur, &sides, mid * remaining);
                if s * (probe.q[a] - probe.r[b]) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON {
                    break;
                }
            }
            theta = theta.min(hi);
        }
        let part = theta * remaining;
        cur = rk4_frozen(&cur, &sides, part);
        remaining -= part;
        splits += 1;
    }
    cur.t = target;
    if !cur.is_finite() {
        return Err(Error::Numeric("peakon state became non-finite".into()));
    }
    Ok(cur)
}

/// Amplitude bound used by [`evolve_peakons`]: `1e6 * max(1, max |amp|)`.
pub fn peakon_blowup_threshold(ps: &PeakonState) -> f64 {
    1e6 * ps.max_amplitude().max(1.0)
}

/// Marches to `t_end` and returns every step. The step is shrunk slightly,
/// if needed, so the last state lands exactly on `t_end`.
pub fn evolve_peakons(
    ps: &PeakonState,
    t_end: f64,
    dt: f64,
) -> Result<Vec<PeakonState>, Interrupted<Vec<PeakonState>>> {
    let mut traj = vec![ps.clone()];
    let fail = |traj: Vec<PeakonState>, error| Err(Interrupted { partial: traj, error });
    if !(dt.is_finite() && dt > 0.0) {
        return fail(traj, Error::Contract(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= ps.t) {
        return fail(traj, Error::Contract(format!("t_end {t_end} precedes t0 {}", ps.t)));
    }
    if !ps.is_finite() {
        return fail(traj, Error::Numeric("peakon state is not finite".into()));
    }
    let span = t_end - ps.t;
    let steps = ((span / dt) - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(traj);
    }
    let h = span / steps as f64;
    let threshold = peakon_blowup_threshold(ps);
    traj.reserve(steps);
    for i in 1..=steps {
        let prev = traj.last().expect("trajectory is never empty");
        let mut next = match advance(prev, h) {
            Ok(s) => s,
            Err(_) => {
                let error = Error::BlowUp {
                    t: prev.t,
                    max_abs: f64::INFINITY,
                    threshold,
                };
                return fail(traj, error);
            }
        };
        next.t = ps.t + i as f64 * h;
        let amp = next.max_amplitude();
        if amp > threshold {
            let error = Error::BlowUp {
                t: prev.t,
                max_abs: amp,
                threshold,
            };
            return fail(traj, error);
        }
        traj.push(next);
    }
    Ok(traj)
}

/// Positions relative to the centre of mass of all peakon positions, which
/// removes the common drift of a waltzing pair.
pub fn co_moving(traj: &[PeakonState]) -> Vec<PeakonState> {
    traj.iter()
        .map(|s| {
            let count = (s.q.len() + s.r.len()).max(1) as f64;
            let centre = (s.q.iter().sum::<f64>() + s.r.iter().sum::<f64>()) / count;
            PeakonState {
                t: s.t,
                q: s.q.iter().map(|x| x - centre).collect(),
                m_amp: s.m_amp.clone(),
                r: s.r.iter().map(|x| x - centre).collect(),
                n_amp: s.n_amp.clone(),
            }
        })
        .collect()
}

/// Period and amplitude exchange of a waltzing pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaltzMeasurement {
    /// Return time of `(q - r, m - n)` to its initial value.
    pub period: f64,
    /// `|m(T/2) - n(0)| + |n(T/2) - m(0)|`.
    pub swap_error: f64,
    /// The state half a period after the start.
    pub half_period_state: PeakonState,
}

/// Coordinates of the relative orbit: separation `z = q - r` and amplitude
/// contrast `w = (m - n) / (m + n)` (plain `m - n` when `m + n = 0`).
fn relative(ps: &PeakonState) -> (f64, f64) {
    let z = ps.q[0] - ps.r[0];
    let s = ps.m_amp[0] + ps.n_amp[0];
    let d = ps.m_amp[0] - ps.n_amp[0];
    (z, if s.abs() > 0.0 { d / s } else { d })
}

/// Measures the waltz period and amplitude swap from a single-pair
/// trajectory. Crossing times and the half-period state are refined by
/// integrating from the nearest sample, so the result is not limited by the
/// sampling interval.
///
/// The separation `q - r` is unchanged by a common translation, so the
/// measurement is the same in the co-moving frame.
pub fn measure_waltz(traj: &[PeakonState]) -> Result<WaltzMeasurement> {
    let first = traj
        .first()
        .ok_or_else(|| Error::Measurement("empty trajectory".into()))?;
    if first.q.len() != 1 || first.r.len() != 1 {
        return Err(Error::Measurement("waltz measurement needs M = N = 1".into()));
    }
    if traj.len() < 3 {
        return Err(Error::Measurement("trajectory too short".into()));
    }
    let (z0, w0) = relative(first);
    let state0_rate = peakon_rhs(first)?;
    let s0 = first.m_amp[0] + first.n_amp[0];
    let dz = state0_rate.q[0] - state0_rate.r[0];
    let dd = state0_rate.m_amp[0] - state0_rate.n_amp[0];
    let dw = if s0.abs() > 0.0 { dd / s0 } else { dd };
    if dz == 0.0 && dw == 0.0 {
        return Err(Error::Measurement(
            "initial state is an equilibrium of the relative motion".into(),
        ));
    }
    // Primary coordinate: whichever moves fastest at the start.
    let use_z = dz.abs() >= dw.abs();
    let dir = if use_z { dz.signum() } else { dw.signum() };
    let primary = |ps: &PeakonState| {
        let (z, w) = relative(ps);
        if use_z {
            dir * (z - z0)
        } else {
            dir * (w - w0)
        }
    };
    let secondary_gap = |ps: &PeakonState| {
        let (z, w) = relative(ps);
        if use_z {
            (w - w0).abs()
        } else {
            (z - z0).abs() / (1.0 + z0.abs())
        }
    };

    let mut went_negative = false;
    let mut period = None;
    for i in 1..traj.len() - 1 {
        let (fa, fb) = (primary(&traj[i]), primary(&traj[i + 1]));
        if fa < 0.0 {
            went_negative = true;
        }
        if !(went_negative && fa < 0.0 && fb >= 0.0) {
            continue;
        }
        let span = traj[i + 1].t - traj[i].t;
        let (mut lo, mut hi) = (0.0_f64, span);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if primary(&advance(&traj[i], mid)?) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * traj[i].t.abs().max(1.0) {
                break;
            }
        }
        let t_cross = 0.5 * (lo + hi);
        let at = advance(&traj[i], t_cross)?;
        if secondary_gap(&at) <= 1e-4 {
            period = Some(at.t - first.t);
            break;
        }
        went_negative = false;
    }
    let period = period.ok_or_else(|| {
        Error::Measurement(format!(
            "no full oscillation within t = {} .. {}",
            first.t,
            traj.last().map_or(first.t, |s| s.t)
        ))
    })?;

    let t_half = first.t + 0.5 * period;
    let j = traj
        .iter()
        .rposition(|s| s.t <= t_half)
        .expect("first sample precedes the half period");
    let half = advance(&traj[j], t_half - traj[j].t)?;
    let swap_error =
        (half.m_amp[0] - first.n_amp[0]).abs() + (half.n_amp[0] - first.m_amp[0]).abs();
    Ok(WaltzMeasurement {
        period,
        swap_error,
        half_period_state: half,
    })
}

/// Waltz of a pair started at `q = -separation/2`, `r = +separation/2`.
pub fn waltz_at_separation(
    m1: f64,
    n1: f64,
    separation: f64,
    t_end: f64,
    dt: f64,
) -> Result<WaltzMeasurement> {
    let ps = PeakonState::pair(m1, n1, -0.5 * separation, 0.5 * separation)?;
    let traj = evolve_peakons(&ps, t_end, dt).map_err(|e| e.error)?;
    measure_waltz(&traj)
}

/// Outcome of a separation scan for a target period.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Separation whose period is closest to the target. Calibrated, not a
    /// value taken from any reference.
    pub separation: f64,
    pub period: f64,
    pub target: f64,
    /// `(separation, measured period)` for every scanned point; `None` when
    /// no full oscillation fit in the integration window.
    pub scan: Vec<(f64, Option<f64>)>,
}

impl Calibration {
    pub fn within(&self, tolerance: f64) -> bool {
        (self.period - self.target).abs() <= tolerance
    }
}

/// Scans `separations` (in parallel), then refines around the best point by
/// golden-section search on `|T(s) - target|`. Each run integrates to
/// `3 * target`.
pub fn calibrate_separation(
    m1: f64,
    n1: f64,
    target: f64,
    separations: &[f64],
    dt: f64,
) -> Result<Calibration> {
    if separations.is_empty() {
        return Err(Error::Contract("no separations to scan".into()));
    }
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::Contract(format!("target period must be positive, got {target}")));
    }
    let t_end = 3.0 * target;
    let measure = |s: f64| waltz_at_separation(m1, n1, s, t_end, dt).ok().map(|w| w.period);
    let scan: Vec<(f64, Option<f64>)> = par::map_slice(separations, |&s| (s, measure(s)));
    let best = scan
        .iter()
        .enumerate()
        .filter_map(|(i, (s, p))| p.map(|p| (i, *s, p)))
        .min_by(|a, b| (a.2 - target).abs().total_cmp(&(b.2 - target).abs()))
        .ok_or_else(|| Error::Measurement("no scanned separation produced a waltz".into()))?;
    let (i, mut sep, mut period) = best;
    let lo = if i > 0 { scan[i - 1].0 } else { sep };
    let hi = if i + 1 < scan.len() { scan[i + 1].0 } else { sep };
    if hi > lo {
        let cost = |s: f64| measure(s).map_or(f64::INFINITY, |p| (p - target).abs());
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (cost(c), cost(d));
        for _ in 0..40 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = cost(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = cost(d);
            }
        }
        let candidates = [(a, cost(a)), (b, cost(b)), (sep, (period - target).abs())];
        let (s_best, _) = candidates
            .into_iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        if let Some(p) = measure(s_best) {
            sep = s_best;
            period = p;
        }
    }
    Ok(Calibration {
        separation: sep,
        period,
        target,
        scan,
    })
}

/// Closed-form waltz period of a single pair:
/// `T = 16 sqrt(s^2 - A) / A` with `s = m + n` and
/// `A = (s^2 - (m - n)^2) exp(-|q - r|)`. Valid for `m, n > 0`.
pub fn analytic_waltz_period(m1: f64, n1: f64, separation: f64) -> f64 {
    let s = m1 + n1;
    let a = 4.0 * m1 * n1 * (-separation.abs()).exp();
    16.0 * (s * s - a).sqrt() / a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn rhs_at_collision() {
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 0.0).unwrap();
        let r = peakon_rhs(&ps).unwrap();
        assert_eq!(r.q[0], 0.5);
        assert_eq!(r.r[0], 5.0);
        assert_eq!(r.m_amp[0], 0.0);
        assert_eq!(r.n_amp[0], 0.0);
    }

    #[test]
    fn rhs_at_ln2() {
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 2f64.ln()).unwrap();
        let r = peakon_rhs(&ps).unwrap();
        assert!((r.q[0] - 0.25).abs() < 1e-15);
        assert!((r.r[0] - 2.5).abs() < 1e-15);
        assert!((r.m_amp[0] + r.n_amp[0]).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_examples() {
        let ps = PeakonState::pair(10.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(peakon_hamiltonian(&ps), 5.0);
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 2f64.ln()).unwrap();
        assert!((peakon_hamiltonian(&ps) - 2.5).abs() < 1e-14);
        let empty = PeakonState::new(0.0, vec![1.0], vec![3.0], vec![], vec![]).unwrap();
        assert_eq!(peakon_hamiltonian(&empty), 0.0);
    }

    #[test]
    fn lengths_are_checked() {
        assert!(PeakonState::new(0.0, vec![0.0], vec![], vec![], vec![]).is_err());
        assert!(PeakonState::new(0.0, vec![f64::NAN], vec![1.0], vec![], vec![]).is_err());
    }

    #[test]
    fn fields_of_single_peakon() {
        let g = make_grid(30.0, 256).unwrap();
        let ps = PeakonState::new(0.0, vec![0.0], vec![10.0], vec![], vec![]).unwrap();
        let (u, v) = peakon_fields(&ps, &g).unwrap();
        assert_eq!(v.max_abs(), 0.0);
        assert!((u.samples()[128] - 5.0).abs() < 1e-12);
        let far = PeakonState::pair(1.0, 1.0, 0.0, 31.0).unwrap();
        assert!(matches!(peakon_fields(&far, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_amplitudes_are_stationary() {
        let ps = PeakonState::pair(0.0, 0.0, -1.0, 2.0).unwrap();
        let traj = evolve_peakons(&ps, 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        let last = traj.last().unwrap();
        assert_eq!((last.q[0], last.r[0]), (-1.0, 2.0));
    }

    #[test]
    fn conservation_over_long_run() {
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 5.0).unwrap();
        let traj = evolve_peakons(&ps, 20.0, 1e-3).unwrap();
        let h0 = peakon_hamiltonian(&ps);
        for s in &traj {
            assert!((s.total_momentum() - 11.0).abs() < 1e-10);
            assert!((peakon_hamiltonian(s) - h0).abs() / h0 < 1e-8);
        }
    }

    #[test]
    fn analytic_period_at_collision_start() {
        assert!((analytic_waltz_period(10.0, 1.0, 0.0) - 3.6).abs() < 1e-12);
        let w = waltz_at_separation(10.0, 1.0, 0.0, 8.0, 1e-3).unwrap();
        assert!((w.period - 3.6).abs() < 1e-6, "{}", w.period);
        assert!(w.swap_error < 1e-6 * 11.0, "{}", w.swap_error);
    }

    #[test]
    fn measured_period_matches_closed_form() {
        for sep in [0.3, 1.0, 2.0] {
            let t = analytic_waltz_period(10.0, 1.0, sep);
            let w = waltz_at_separation(10.0, 1.0, sep, 1.3 * t, 1e-3).unwrap();
            assert!((w.period - t).abs() < 1e-6 * t, "sep {sep}: {} vs {t}", w.period);
            assert!(w.swap_error < 1e-6 * 11.0, "sep {sep}: {}", w.swap_error);
        }
    }

    #[test]
    fn short_trajectory_is_a_measurement_error() {
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 5.0).unwrap();
        let traj = evolve_peakons(&ps, 20.0, 1e-2).unwrap();
        assert!(matches!(measure_waltz(&traj), Err(Error::Measurement(_))));
    }

    #[test]
    fn advance_backwards_retraces() {
        let ps = PeakonState::pair(10.0, 1.0, 0.0, 0.0).unwrap();
        let fwd = advance(&advance(&ps, 0.01).unwrap(), 0.01).unwrap();
        let back = advance(&advance(&fwd, -0.01).unwrap(), -0.01).unwrap();
        let dq = (back.q[0] - ps.q[0]).abs();
        let dm = (back.m_amp[0] - ps.m_amp[0]).abs();
        assert!(dq < 1e-9 && dm < 1e-9, "{dq} {dm}");
    }

    #[test]
    fn calibration_finds_collision_start() {
        let seps: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        let cal = calibrate_separation(10.0, 1.0, 3.6, &seps, 1e-3).unwrap();
        assert!(cal.within(0.05), "{cal:?}");
        assert!(cal.separation < 0.05);
    }
}
