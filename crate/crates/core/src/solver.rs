//! Method-of-lines integration of the cross-coupled system in momentum form
//!
//! ```text
//! m_t + 2 v_x m + v m_x = 0,    u = (1 - d^2/dx^2)^{-1} m
//! n_t + 2 u_x n + u n_x = 0,    v = (1 - d^2/dx^2)^{-1} n
//! ```
//!
//! Spatial derivatives and the Helmholtz inverse are spectral; time stepping
//! is classical fixed-step RK4. Two reductions are supported as modes: the
//! Camassa-Holm reduction `u = v` (so `m = n`) and the complex reduction
//! `v = conj(u)` (so `n = conj(m)`), each re-imposed after every step.

use num_complex::Complex64;

use crate::error::{Error, Interrupted, Result};
use crate::grid::{Field, Grid, Scalar};
use crate::spectral::{
    apply_symbol, derivative_symbol, from_spectrum, helmholtz_forward, helmholtz_inverse,
    spectral_derivative, spectrum, truncate_two_thirds,
};

/// Tolerance for the mode constraints (`m = n`, `n = conj(m)`).
pub const MODE_TOLERANCE: f64 = 1e-12;

/// Which invariant manifold the state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Coupled,
    /// `u = v`: two copies of the Camassa-Holm equation.
    ChReduction,
    /// `v = conj(u)`: the complex scalar reduction. Requires complex samples.
    ComplexConjugate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Coupled => "coupled",
            Mode::ChReduction => "ch_reduction",
            Mode::ComplexConjugate => "complex_conjugate",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupled" => Ok(Mode::Coupled),
            "ch_reduction" => Ok(Mode::ChReduction),
            "complex_conjugate" => Ok(Mode::ComplexConjugate),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Treatment of the quadratic products in the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dealiasing {
    /// Plain pseudospectral products. Keeps compactly supported momenta
    /// compact to round-off.
    #[default]
    Off,
    /// Zero the top third of modes of every factor and of every product.
    TwoThirds,
}

impl Dealiasing {
    pub fn as_str(self) -> &'static str {
        match self {
            Dealiasing::Off => "off",
            Dealiasing::TwoThirds => "two_thirds",
        }
    }
}

impl std::str::FromStr for Dealiasing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Dealiasing::Off),
            "two_thirds" => Ok(Dealiasing::TwoThirds),
            other => Err(Error::config("dealias", format!("unknown dealiasing `{other}`"))),
        }
    }
}

/// Time plus the momentum pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeState<T: Scalar> {
    pub t: f64,
    pub m: Field<T>,
    pub n: Field<T>,
    pub mode: Mode,
}

impl<T: Scalar> PdeState<T> {
    /// Validates grid agreement, finiteness and the mode constraint.
    pub fn new(t: f64, m: Field<T>, n: Field<T>, mode: Mode) -> Result<Self> {
        m.grid().ensure_same(n.grid(), "PdeState")?;
        if mode == Mode::ComplexConjugate && !T::IS_COMPLEX {
            return Err(Error::Contract(
                "complex_conjugate mode needs complex samples".into(),
            ));
        }
        m.ensure_finite("PdeState m")?;
        n.ensure_finite("PdeState n")?;
        let state = PdeState { t, m, n, mode };
        let residual = state.mode_residual();
        let scale = state.m.max_abs().max(1.0);
        if residual > MODE_TOLERANCE * scale {
            return Err(Error::Contract(format!(
                "{} constraint violated by {residual:.3e}",
                mode.as_str()
            )));
        }
        Ok(state)
    }

    pub fn coupled(m: Field<T>, n: Field<T>) -> Result<Self> {
        Self::new(0.0, m, n, Mode::Coupled)
    }

    pub fn ch_reduction(m: Field<T>) -> Result<Self> {
        let n = m.clone();
        Self::new(0.0, m, n, Mode::ChReduction)
    }

    pub fn grid(&self) -> &Grid {
        self.m.grid()
    }

    /// Distance from the mode's invariant manifold (0 for `Coupled`).
    pub fn mode_residual(&self) -> f64 {
        match self.mode {
            Mode::Coupled => 0.0,
            Mode::ChReduction => self.m.max_abs_diff(&self.n),
            Mode::ComplexConjugate => self.m.conj().max_abs_diff(&self.n),
        }
    }

    /// Projects back onto the mode's invariant manifold.
    pub fn impose_mode(&mut self) {
        match self.mode {
            Mode::Coupled => {}
            Mode::ChReduction => {
                let avg = self.m.axpy(1.0, &self.n).map(|s| s * 0.5);
                self.n = avg.clone();
                self.m = avg;
            }
            Mode::ComplexConjugate => {
                let sym = self.m.axpy(1.0, &self.n.conj()).map(|s| s * 0.5);
                self.n = sym.conj();
                self.m = sym;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m.max_abs().max(self.n.max_abs())
    }
}

impl PdeState<Complex64> {
    /// Complex reduction state with `n = conj(m)`.
    pub fn complex_conjugate(m: Field<Complex64>) -> Result<Self> {
        let n = m.conj();
        Self::new(0.0, m, n, Mode::ComplexConjugate)
    }
}

/// Snapshots at strictly increasing times, all on one grid and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Scalar> {
    snapshots: Vec<PdeState<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(first: PdeState<T>) -> Self {
        Trajectory {
            snapshots: vec![first],
        }
    }

    pub fn push(&mut self, state: PdeState<T>) -> Result<()> {
        let last = self.snapshots.last().expect("trajectory is never empty");
        if state.t <= last.t {
            return Err(Error::Contract(format!(
                "snapshot time {} does not follow {}",
                state.t, last.t
            )));
        }
        if state.mode != last.mode || !state.grid().same_as(last.grid()) {
            return Err(Error::Contract("snapshot mode or grid changed".into()));
        }
        self.snapshots.push(state);
        Ok(())
    }

    pub fn snapshots(&self) -> &[PdeState<T>] {
        &self.snapshots
    }

    pub fn first(&self) -> &PdeState<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &PdeState<T> {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn into_snapshots(self) -> Vec<PdeState<T>> {
        self.snapshots
    }
}

/// `(u, v)` from `(m, n)`.
pub fn recover_velocity<T: Scalar>(state: &PdeState<T>) -> Result<(Field<T>, Field<T>)> {
    Ok((helmholtz_inverse(&state.m)?, helmholtz_inverse(&state.n)?))
}

/// Velocities and the derivatives the right-hand side needs.
struct Kinematics<T: Scalar> {
    /// Possibly truncated copies of m and n.
    m: Field<T>,
    n: Field<T>,
    m_x: Field<T>,
    n_x: Field<T>,
    u: Field<T>,
    v: Field<T>,
    u_x: Field<T>,
    v_x: Field<T>,
}

fn kinematics<T: Scalar>(m: &Field<T>, n: &Field<T>, dealias: Dealiasing) -> Kinematics<T> {
    let grid = m.grid();
    let mut ms = spectrum(m);
    let mut ns = spectrum(n);
    let (m, n) = match dealias {
        Dealiasing::Off => (m.clone(), n.clone()),
        Dealiasing::TwoThirds => {
            truncate_two_thirds(grid, &mut ms);
            truncate_two_thirds(grid, &mut ns);
            (from_spectrum(grid, ms.clone()), from_spectrum(grid, ns.clone()))
        }
    };
    let d = derivative_symbol(grid);
    let inv = |_: usize, k: f64| Complex64::new(1.0 / (1.0 + k * k), 0.0);
    let d_inv = |j: usize, k: f64| d(j, k) * inv(j, k);
    Kinematics {
        m_x: apply_symbol(grid, &ms, &d),
        n_x: apply_symbol(grid, &ns, &d),
        u: apply_symbol(grid, &ms, inv),
        v: apply_symbol(grid, &ns, inv),
        u_x: apply_symbol(grid, &ms, d_inv),
        v_x: apply_symbol(grid, &ns, d_inv),
        m,
        n,
    }
}

/// Right-hand side plus the largest transport speed `max(|u|, |v|)`.
fn rates<T: Scalar>(
    m: &Field<T>,
    n: &Field<T>,
    dealias: Dealiasing,
) -> Result<(Field<T>, Field<T>, f64)> {
    let k = kinematics(m, n, dealias);
    let len = m.len();
    let mut dm = Vec::with_capacity(len);
    let mut dn = Vec::with_capacity(len);
    let (ms, ns) = (k.m.samples(), k.n.samples());
    let (mx, nx) = (k.m_x.samples(), k.n_x.samples());
    let (u, v) = (k.u.samples(), k.v.samples());
    let (ux, vx) = (k.u_x.samples(), k.v_x.samples());
    let mut speed = 0.0_f64;
    for j in 0..len {
        dm.push((vx[j] * ms[j] * 2.0 + v[j] * mx[j]) * -1.0);
        dn.push((ux[j] * ns[j] * 2.0 + u[j] * nx[j]) * -1.0);
        speed = speed.max(u[j].modulus()).max(v[j].modulus());
    }
    let grid = m.grid();
    let mut dm = Field::from_samples(grid, dm)?;
    let mut dn = Field::from_samples(grid, dn)?;
    if dealias == Dealiasing::TwoThirds {
        dm = crate::spectral::dealias(&dm);
        dn = crate::spectral::dealias(&dn);
    }
    if !(dm.is_finite() && dn.is_finite()) {
        return Err(Error::Numeric("right-hand side is not finite".into()));
    }
    Ok((dm, dn, speed))
}

/// `(m_t, n_t) = (-2 v_x m - v m_x, -2 u_x n - u n_x)`.
pub fn rhs_momentum<T: Scalar>(
    state: &PdeState<T>,
    dealias: Dealiasing,
) -> Result<(Field<T>, Field<T>)> {
    state.m.ensure_finite("rhs_momentum m")?;
    state.n.ensure_finite("rhs_momentum n")?;
    let (dm, dn, _) = rates(&state.m, &state.n, dealias)?;
    Ok((dm, dn))
}

/// Right-hand side of the real `(r, s)` form of the complex reduction,
/// `u = r + i s`. Returns `(r_t, s_t)`.
///
/// Evaluated through the momentum form: `m = (1 - d^2)(r + i s)`,
/// `n = conj(m)`, then `u_t = (1 - d^2)^{-1} m_t`.
pub fn rhs_complex_real_form(
    r: &Field<f64>,
    s: &Field<f64>,
    dealias: Dealiasing,
) -> Result<(Field<f64>, Field<f64>)> {
    let u = Field::from_parts(r, s)?;
    let m = helmholtz_forward(&u)?;
    let n = m.conj();
    let (dm, _, _) = rates(&m, &n, dealias)?;
    let du = helmholtz_inverse(&dm)?;
    Ok((du.real_part(), du.imag_part()))
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub dealias: Dealiasing,
    /// Absolute bound on `max(|m|, |n|)`. `None` means
    /// `1e6 * max(1, max|m0|, max|n0|)` from the initial state.
    pub blowup_threshold: Option<f64>,
    /// Largest allowed `dt * max(|u|, |v|) / spacing`.
    pub cfl: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dealias: Dealiasing::Off,
            blowup_threshold: None,
            cfl: 0.5,
        }
    }
}

/// Default blow-up threshold for an initial state.
pub fn default_blowup_threshold<T: Scalar>(initial: &PdeState<T>) -> f64 {
    1e6 * initial.max_abs().max(1.0)
}

/// Per-interval step plan: `(target time, number of steps, step size)`.
pub(crate) fn step_schedule(
    t0: f64,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
) -> Result<Vec<(f64, usize, f64)>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Contract(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= t0) {
        return Err(Error::Contract(format!("t_end {t_end} precedes t0 {t0}")));
    }
    let mut targets: Vec<f64> = Vec::with_capacity(output_times.len() + 1);
    let mut prev = t0;
    for &t in output_times {
        if t < t0 - 1e-12 || t > t_end + 1e-12 {
            return Err(Error::Contract(format!(
                "output time {t} outside [{t0}, {t_end}]"
            )));
        }
        if t < prev - 1e-12 {
            return Err(Error::Contract("output times must increase".into()));
        }
        if t > prev + 1e-12 {
            targets.push(t.min(t_end));
            prev = t;
        }
    }
    if t_end > prev + 1e-12 {
        targets.push(t_end);
    }
    let mut plan = Vec::with_capacity(targets.len());
    let mut start = t0;
    for target in targets {
        let span = target - start;
        let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
        plan.push((target, steps, span / steps as f64));
        start = target;
    }
    Ok(plan)
}

/// Fixed-step RK4 driver.
#[derive(Debug, Clone, Default)]
pub struct Solver {
    pub options: SolverOptions,
}

impl Solver {
    pub fn new(options: SolverOptions) -> Self {
        Solver { options }
    }

    /// One RK4 step. A negative `dt` integrates backwards.
    ///
    /// Fails with [`Error::BlowUp`] when the result exceeds the threshold;
    /// the input state is then the last valid one.
    pub fn step_rk4<T: Scalar>(&self, state: &PdeState<T>, dt: f64) -> Result<PdeState<T>> {
        let threshold = self
            .options
            .blowup_threshold
            .unwrap_or_else(|| default_blowup_threshold(state));
        self.step_with_threshold(state, dt, threshold)
    }

    fn step_with_threshold<T: Scalar>(
        &self,
        state: &PdeState<T>,
        dt: f64,
        threshold: f64,
    ) -> Result<PdeState<T>> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::Contract(format!("dt must be finite and nonzero, got {dt}")));
        }
        let dealias = self.options.dealias;
        let (m0, n0) = (&state.m, &state.n);
        let (k1m, k1n, speed) = rates(m0, n0, dealias)?;
        let h = state.grid().spacing();
        let bound = self.options.cfl * h / speed.max(f64::MIN_POSITIVE);
        if dt.abs() > bound {
            return Err(Error::Contract(format!(
                "dt = {dt} exceeds the stability bound {bound:.3e} (max speed {speed:.3e})"
            )));
        }
        let (k2m, k2n, _) = rates(&m0.axpy(0.5 * dt, &k1m), &n0.axpy(0.5 * dt, &k1n), dealias)?;
        let (k3m, k3n, _) = rates(&m0.axpy(0.5 * dt, &k2m), &n0.axpy(0.5 * dt, &k2n), dealias)?;
        let (k4m, k4n, _) = rates(&m0.axpy(dt, &k3m), &n0.axpy(dt, &k3n), dealias)?;
        let combine = |y: &Field<T>, a: &Field<T>, b: &Field<T>, c: &Field<T>, d: &Field<T>| {
            let mut out = y.clone();
            let w = dt / 6.0;
            for (j, o) in out.samples_mut().iter_mut().enumerate() {
                let incr = a.samples()[j]
                    + (b.samples()[j] + c.samples()[j]) * 2.0
                    + d.samples()[j];
                *o = *o + incr * w;
            }
            out
        };
        let mut next = PdeState {
            t: state.t + dt,
            m: combine(m0, &k1m, &k2m, &k3m, &k4m),
            n: combine(n0, &k1n, &k2n, &k3n, &k4n),
            mode: state.mode,
        };
        next.impose_mode();
        let max_abs = next.max_abs();
        if !(next.m.is_finite() && next.n.is_finite()) || max_abs > threshold {
            return Err(Error::BlowUp {
                t: state.t,
                max_abs: if max_abs.is_finite() { max_abs } else { f64::INFINITY },
                threshold,
            });
        }
        Ok(next)
    }

    /// Marches to `t_end`, recording a snapshot at the start, at each output
    /// time and at `t_end`. The step is shrunk per interval so every output
    /// time is hit exactly. `observer` sees each snapshot as it is recorded.
    pub fn evolve<T: Scalar>(
        &self,
        state: &PdeState<T>,
        t_end: f64,
        dt: f64,
        output_times: &[f64],
        mut observer: impl FnMut(&PdeState<T>),
    ) -> Result<Trajectory<T>, Interrupted<Trajectory<T>>> {
        let mut traj = Trajectory::new(state.clone());
        observer(state);
        let plan = match step_schedule(state.t, t_end, dt, output_times) {
            Ok(p) => p,
            Err(error) => return Err(Interrupted { partial: traj, error }),
        };
        let threshold = self
            .options
            .blowup_threshold
            .unwrap_or_else(|| default_blowup_threshold(state));
        let mut current = state.clone();
        for (target, steps, h) in plan {
            for _ in 0..steps {
                match self.step_with_threshold(&current, h, threshold) {
                    Ok(next) => current = next,
                    Err(error) => return Err(Interrupted { partial: traj, error }),
                }
            }
            current.t = target;
            observer(&current);
            if let Err(error) = traj.push(current.clone()) {
                return Err(Interrupted { partial: traj, error });
            }
        }
        Ok(traj)
    }

    /// RK4 march of the real `(r, s)` form. Returns `(t, r, s)` at the start,
    /// each output time and `t_end`.
    pub fn evolve_real_form(
        &self,
        r: &Field<f64>,
        s: &Field<f64>,
        t_end: f64,
        dt: f64,
        output_times: &[f64],
    ) -> Result<Vec<(f64, Field<f64>, Field<f64>)>> {
        let dealias = self.options.dealias;
        let mut out = vec![(0.0, r.clone(), s.clone())];
        let (mut r, mut s) = (r.clone(), s.clone());
        for (target, steps, h) in step_schedule(0.0, t_end, dt, output_times)? {
            for _ in 0..steps {
                let (a_r, a_s) = rhs_complex_real_form(&r, &s, dealias)?;
                let (b_r, b_s) =
                    rhs_complex_real_form(&r.axpy(0.5 * h, &a_r), &s.axpy(0.5 * h, &a_s), dealias)?;
                let (c_r, c_s) =
                    rhs_complex_real_form(&r.axpy(0.5 * h, &b_r), &s.axpy(0.5 * h, &b_s), dealias)?;
                let (d_r, d_s) =
                    rhs_complex_real_form(&r.axpy(h, &c_r), &s.axpy(h, &c_s), dealias)?;
                let step = |y: &Field<f64>, a: &Field<f64>, b: &Field<f64>, c: &Field<f64>, d: &Field<f64>| {
                    let mut o = y.clone();
                    for (j, v) in o.samples_mut().iter_mut().enumerate() {
                        *v += h / 6.0
                            * (a.samples()[j] + 2.0 * (b.samples()[j] + c.samples()[j]) + d.samples()[j]);
                    }
                    o
                };
                r = step(&r, &a_r, &b_r, &c_r, &d_r);
                s = step(&s, &a_s, &b_s, &c_s, &d_s);
            }
            out.push((target, r.clone(), s.clone()));
        }
        Ok(out)
    }
}

/// `u_x` of a velocity field; shorthand used by diagnostics and tests.
pub fn velocity_gradient<T: Scalar>(u: &Field<T>) -> Result<Field<T>> {
    spectral_derivative(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn bump(x: f64, c: f64, w: f64, a: f64) -> f64 {
        let s = (x - c) / w;
        if s.abs() < 1.0 {
            a * (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn zero_state_has_zero_velocity_and_rhs() {
        let g = make_grid(10.0, 64).unwrap();
        let s = PdeState::coupled(Field::<f64>::zeros(&g), Field::zeros(&g)).unwrap();
        let (u, v) = recover_velocity(&s).unwrap();
        assert_eq!(u.max_abs() + v.max_abs(), 0.0);
        let (a, b) = rhs_momentum(&s, Dealiasing::Off).unwrap();
        assert_eq!(a.max_abs() + b.max_abs(), 0.0);
        let next = Solver::default().step_rk4(&s, 0.1).unwrap();
        assert_eq!(next.max_abs(), 0.0);
    }

    #[test]
    fn cosine_momentum_gives_half_cosine_velocity() {
        let g = make_grid(PI, 32).unwrap();
        let m = Field::from_fn(&g, f64::cos);
        let n = Field::from_fn(&g, |x| (2.0 * x).sin());
        let s = PdeState::coupled(m, n).unwrap();
        let (u, _) = recover_velocity(&s).unwrap();
        assert!(u.max_abs_diff(&Field::from_fn(&g, |x| 0.5 * x.cos())) < 1e-15);
    }

    #[test]
    fn cosine_rhs_closed_form() {
        // v = cos/2, v_x = -sin/2: m_t = -2(-sin/2)cos - (cos/2)(-sin) = 3/2 sin cos
        let g = make_grid(PI, 32).unwrap();
        let m = Field::from_fn(&g, f64::cos);
        let s = PdeState::coupled(m.clone(), m).unwrap();
        for dealias in [Dealiasing::Off, Dealiasing::TwoThirds] {
            let (dm, dn) = rhs_momentum(&s, dealias).unwrap();
            let expect = Field::from_fn(&g, |x| 1.5 * x.sin() * x.cos());
            assert!(dm.max_abs_diff(&expect) < 1e-14);
            assert!(dn.max_abs_diff(&expect) < 1e-14);
        }
    }

    #[test]
    fn ch_reduction_rhs_is_symmetric() {
        let g = make_grid(15.0, 256).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 1.0, 4.0, 2.0) - bump(x, -5.0, 2.0, 0.7));
        let s = PdeState::ch_reduction(m).unwrap();
        let (dm, dn) = rhs_momentum(&s, Dealiasing::Off).unwrap();
        assert_eq!(dm, dn);
    }

    #[test]
    fn mode_constraints_are_checked() {
        let g = make_grid(5.0, 32).unwrap();
        let m = Field::from_fn(&g, f64::sin);
        let n = Field::from_fn(&g, f64::cos);
        assert!(PdeState::new(0.0, m.clone(), n, Mode::ChReduction).is_err());
        assert!(PdeState::new(0.0, m.clone(), m, Mode::ComplexConjugate).is_err());
    }

    #[test]
    fn two_thirds_rhs_has_no_high_modes() {
        let g = make_grid(10.0, 128).unwrap();
        let m = Field::from_fn(&g, |x| (-(x - 1.0) * (x - 1.0)).exp());
        let n = Field::from_fn(&g, |x| (-(x + 1.0) * (x + 1.0) * 2.0).exp());
        let s = PdeState::coupled(m, n).unwrap();
        let (dm, dn) = rhs_momentum(&s, Dealiasing::TwoThirds).unwrap();
        assert!(crate::spectral::high_mode_fraction(&dm) < 1e-13);
        assert!(crate::spectral::high_mode_fraction(&dn) < 1e-13);
    }

    #[test]
    fn cfl_guard_rejects_large_steps() {
        let g = make_grid(10.0, 128).unwrap();
        let m = Field::from_fn(&g, |x| 10.0 * (-x * x).exp());
        let s = PdeState::ch_reduction(m).unwrap();
        let err = Solver::default().step_rk4(&s, 1.0).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    #[test]
    fn blowup_guard_fires() {
        let g = make_grid(10.0, 128).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 0.0, 3.0, 1.0));
        let s = PdeState::coupled(m.clone(), m).unwrap();
        let solver = Solver::new(SolverOptions {
            blowup_threshold: Some(0.1),
            ..Default::default()
        });
        let err = solver.step_rk4(&s, 1e-3).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
        let interrupted = solver.evolve(&s, 1.0, 1e-3, &[0.5], |_| {}).unwrap_err();
        assert_eq!(interrupted.partial.len(), 1);
        assert!(matches!(interrupted.error, Error::BlowUp { .. }));
    }

    #[test]
    fn schedule_lands_on_output_times() {
        let plan = step_schedule(0.0, 1.0, 0.3, &[0.0, 0.25, 0.5]).unwrap();
        let targets: Vec<f64> = plan.iter().map(|p| p.0).collect();
        assert_eq!(targets, vec![0.25, 0.5, 1.0]);
        assert_eq!(plan[0].1, 1);
        assert_eq!(plan[2].1, 2);
        assert!((plan[2].2 - 0.25).abs() < 1e-15);
        assert!(step_schedule(0.0, 1.0, 0.1, &[0.5, 0.2]).is_err());
        assert!(step_schedule(0.0, 1.0, 0.1, &[1.5]).is_err());
    }

    #[test]
    fn evolve_to_start_time_is_single_snapshot() {
        let g = make_grid(10.0, 64).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 0.0, 3.0, 1.0));
        let s = PdeState::coupled(m.clone(), m).unwrap();
        let mut seen = 0;
        let traj = Solver::default().evolve(&s, 0.0, 1e-3, &[], |_| seen += 1).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(seen, 1);
    }

    #[test]
    fn real_form_with_zero_imaginary_part_is_ch() {
        // s = 0: (1 - d^2) r_t = -3 r r_x + 2 r_x r_xx + r r_xxx
        let g = make_grid(20.0, 1024).unwrap();
        let r = Field::from_fn(&g, |x| bump(x, 0.0, 5.0, 1.0));
        let s = Field::zeros(&g);
        let (rt, st) = rhs_complex_real_form(&r, &s, Dealiasing::Off).unwrap();
        assert!(st.max_abs() < 1e-14);
        let rx = spectral_derivative(&r).unwrap();
        let rxx = spectral_derivative(&rx).unwrap();
        let rxxx = spectral_derivative(&rxx).unwrap();
        let rhs = Field::from_fn(&g, |_| 0.0);
        let mut rhs = rhs;
        for j in 0..1024 {
            let (a, b, c, d) = (r.samples()[j], rx.samples()[j], rxx.samples()[j], rxxx.samples()[j]);
            rhs.samples_mut()[j] = -3.0 * a * b + 2.0 * b * c + a * d;
        }
        let expect = helmholtz_inverse(&rhs).unwrap();
        let err = rt.max_abs_diff(&expect);
        assert!(err < 1e-10, "{err}");
    }
}
