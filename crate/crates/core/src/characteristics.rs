//! Flow maps of the two velocity fields.
//!
//! `phi` follows `v` (`phi_t = v(phi)`) and carries `m`; `xi` follows `u`
//! (`xi_t = u(xi)`) and carries `n`. Along them the momenta satisfy
//! `m(phi, t) phi_x^2 = m0` and `n(xi, t) xi_x^2 = n0`. The Jacobians are
//! advanced in log form, `d/dt ln phi_x = v_x(phi)`, so they stay positive.

use crate::error::{Error, Interrupted, Result};
use crate::grid::{Field, Grid};
use crate::par;
use crate::solver::{
    default_blowup_threshold, rhs_momentum, step_schedule, PdeState, Solver, Trajectory,
};
use crate::spectral::{helmholtz_inverse, spectral_derivative};

/// Default label stride: every fourth grid node.
pub const DEFAULT_LABEL_STRIDE: usize = 4;

/// Tolerance for matching a characteristic set to a field's time.
const TIME_TOLERANCE: f64 = 1e-9;

/// Positions and Jacobians of both flows for a fixed set of labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSet {
    pub t: f64,
    /// Initial positions, strictly increasing.
    pub labels: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub xi_x: Vec<f64>,
}

impl CharacteristicSet {
    /// Identity maps at time `t` on the given labels.
    pub fn identity(t: f64, labels: Vec<f64>) -> Result<Self> {
        if labels.windows(2).any(|w| w[1] <= w[0]) || labels.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("labels must be finite and strictly increasing".into()));
        }
        let ones = vec![1.0; labels.len()];
        Ok(CharacteristicSet {
            t,
            phi: labels.clone(),
            xi: labels.clone(),
            phi_x: ones.clone(),
            xi_x: ones,
            labels,
        })
    }

    /// Identity maps on every `stride`-th grid node.
    pub fn on_grid(t: f64, grid: &Grid, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Contract("label stride must be positive".into()));
        }
        let labels = grid.nodes().iter().step_by(stride).copied().collect();
        Self::identity(t, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Both flows are strictly increasing in the label.
    pub fn is_monotone(&self) -> bool {
        self.phi.windows(2).all(|w| w[1] > w[0]) && self.xi.windows(2).all(|w| w[1] > w[0])
    }

    /// Largest relative gap between the transported Jacobians and centred
    /// differences of the positions, over interior labels. Returns
    /// `(phi, xi)`.
    pub fn jacobian_fd_discrepancy(&self) -> (f64, f64) {
        let gap = |pos: &[f64], jac: &[f64]| {
            let mut worst = 0.0_f64;
            for i in 1..pos.len().saturating_sub(1) {
                let fd = (pos[i + 1] - pos[i - 1]) / (self.labels[i + 1] - self.labels[i - 1]);
                worst = worst.max((fd - jac[i]).abs() / jac[i]);
            }
            worst
        };
        (gap(&self.phi, &self.phi_x), gap(&self.xi, &self.xi_x))
    }
}

/// Four-point Lagrange interpolation of a periodic field.
pub fn interpolate_cubic(f: &Field<f64>, x: f64) -> f64 {
    let grid = f.grid();
    let n = grid.n_points();
    let s = (grid.wrap(x) + grid.half_length()) / grid.spacing();
    let base = s.floor();
    let p = s - base;
    let i = base as isize;
    let at = |k: isize| f.samples()[(i + k).rem_euclid(n as isize) as usize];
    let w_m1 = -p * (p - 1.0) * (p - 2.0) / 6.0;
    let w_0 = (p + 1.0) * (p - 1.0) * (p - 2.0) / 2.0;
    let w_1 = -(p + 1.0) * p * (p - 2.0) / 2.0;
    let w_2 = (p + 1.0) * p * (p - 1.0) / 6.0;
    w_m1 * at(-1) + w_0 * at(0) + w_1 * at(1) + w_2 * at(2)
}

/// A velocity field and its gradient at one instant.
#[derive(Debug, Clone)]
pub struct VelocityStage {
    pub u: Field<f64>,
    pub u_x: Field<f64>,
    pub v: Field<f64>,
    pub v_x: Field<f64>,
}

impl VelocityStage {
    pub fn new(u: Field<f64>, v: Field<f64>) -> Result<Self> {
        u.grid().ensure_same(v.grid(), "VelocityStage")?;
        Ok(VelocityStage {
            u_x: spectral_derivative(&u)?,
            v_x: spectral_derivative(&v)?,
            u,
            v,
        })
    }

    /// Velocities of a momentum pair.
    pub fn from_momenta(m: &Field<f64>, n: &Field<f64>) -> Result<Self> {
        Self::new(helmholtz_inverse(m)?, helmholtz_inverse(n)?)
    }
}

/// One RK4 step of `(x, ln x_label) -> (vel(x), vel_x(x))` for every label.
fn rk4_flow(
    pos: &[f64],
    jac: &[f64],
    stages: [(&Field<f64>, &Field<f64>); 3],
    dt: f64,
) -> Vec<(f64, f64)> {
    let [(w0, dw0), (wm, dwm), (w1, dw1)] = stages;
    par::map_range(pos.len(), |i| {
        let x = pos[i];
        let k1 = (interpolate_cubic(w0, x), interpolate_cubic(dw0, x));
        let x2 = x + 0.5 * dt * k1.0;
        let k2 = (interpolate_cubic(wm, x2), interpolate_cubic(dwm, x2));
        let x3 = x + 0.5 * dt * k2.0;
        let k3 = (interpolate_cubic(wm, x3), interpolate_cubic(dwm, x3));
        let x4 = x + dt * k3.0;
        let k4 = (interpolate_cubic(w1, x4), interpolate_cubic(dw1, x4));
        let dx = dt / 6.0 * (k1.0 + 2.0 * (k2.0 + k3.0) + k4.0);
        let dl = dt / 6.0 * (k1.1 + 2.0 * (k2.1 + k3.1) + k4.1);
        (x + dx, jac[i] * dl.exp())
    })
}

/// Advances both flows by `dt` with velocities given at the start, middle
/// and end of the step.
pub fn advect_staged(
    cs: &CharacteristicSet,
    start: &VelocityStage,
    mid: &VelocityStage,
    end: &VelocityStage,
    dt: f64,
) -> Result<CharacteristicSet> {
    let grid = start.u.grid();
    grid.ensure_same(mid.u.grid(), "advect")?;
    grid.ensure_same(end.u.grid(), "advect")?;
    let l = grid.half_length();
    let inside = |x: &f64| *x >= -l && *x < l;
    if !cs.phi.iter().chain(&cs.xi).all(inside) {
        return Err(Error::Domain("characteristic outside the window".into()));
    }
    let phi = rk4_flow(
        &cs.phi,
        &cs.phi_x,
        [(&start.v, &start.v_x), (&mid.v, &mid.v_x), (&end.v, &end.v_x)],
        dt,
    );
    let xi = rk4_flow(
        &cs.xi,
        &cs.xi_x,
        [(&start.u, &start.u_x), (&mid.u, &mid.u_x), (&end.u, &end.u_x)],
        dt,
    );
    let (phi, phi_x): (Vec<f64>, Vec<f64>) = phi.into_iter().unzip();
    let (xi, xi_x): (Vec<f64>, Vec<f64>) = xi.into_iter().unzip();
    if !phi.iter().chain(&xi).all(inside) {
        return Err(Error::Domain(
            "characteristic left the window; enlarge the domain".into(),
        ));
    }
    if !phi_x.iter().chain(&xi_x).all(|j| j.is_finite() && *j > 0.0) {
        return Err(Error::Numeric("characteristic Jacobian is not finite".into()));
    }
    Ok(CharacteristicSet {
        t: cs.t + dt,
        labels: cs.labels.clone(),
        phi,
        xi,
        phi_x,
        xi_x,
    })
}

/// Advances both flows by `dt` holding the velocities `(u, v)` fixed over
/// the step.
pub fn advect(
    cs: &CharacteristicSet,
    u: &Field<f64>,
    v: &Field<f64>,
    dt: f64,
) -> Result<CharacteristicSet> {
    let stage = VelocityStage::new(u.clone(), v.clone())?;
    advect_staged(cs, &stage, &stage, &stage, dt)
}

/// `max_i |m(phi_i) phi_x_i^2 - m0(x_i)|` and the same for `n` along `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackResidual {
    pub m: f64,
    pub n: f64,
}

impl PullbackResidual {
    pub fn max(&self) -> f64 {
        self.m.max(self.n)
    }
}

/// Checks the pullback identity for both momenta.
pub fn pullback_residual(
    state: &PdeState<f64>,
    cs: &CharacteristicSet,
    initial: &PdeState<f64>,
) -> Result<PullbackResidual> {
    if (state.t - cs.t).abs() > TIME_TOLERANCE * state.t.abs().max(1.0) {
        return Err(Error::Contract(format!(
            "characteristics at t = {} but field at t = {}",
            cs.t, state.t
        )));
    }
    state.grid().ensure_same(initial.grid(), "pullback_residual")?;
    let residual = |now: &Field<f64>, then: &Field<f64>, pos: &[f64], jac: &[f64]| {
        cs.labels
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let pulled = interpolate_cubic(now, pos[i]) * jac[i] * jac[i];
                (pulled - interpolate_cubic(then, x)).abs()
            })
            .fold(0.0_f64, f64::max)
    };
    Ok(PullbackResidual {
        m: residual(&state.m, &initial.m, &cs.phi, &cs.phi_x),
        n: residual(&state.n, &initial.n, &cs.xi, &cs.xi_x),
    })
}

fn map_label(labels: &[f64], pos: &[f64], x: f64) -> Result<f64> {
    let (first, last) = match (labels.first(), labels.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Contract("no labels".into())),
    };
    if !(x >= first && x <= last) {
        return Err(Error::Contract(format!(
            "point {x} outside the label range [{first}, {last}]"
        )));
    }
    let j = labels.partition_point(|&l| l <= x).clamp(1, labels.len() - 1);
    let (x0, x1) = (labels[j - 1], labels[j]);
    let w = (x - x0) / (x1 - x0);
    Ok(pos[j - 1] * (1.0 - w) + pos[j] * w)
}

fn bounds(labels: &[f64], pos: &[f64], alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha < beta) {
        return Err(Error::Contract(format!("need alpha < beta, got {alpha}, {beta}")));
    }
    Ok((map_label(labels, pos, alpha)?, map_label(labels, pos, beta)?))
}

/// `(phi(alpha), phi(beta))`: the interval that confines the support of `m`
/// whose initial support is `[alpha, beta]`.
pub fn support_bounds_m(cs: &CharacteristicSet, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    bounds(&cs.labels, &cs.phi, alpha, beta)
}

/// `(xi(alpha), xi(beta))`: the confining interval for `n`.
pub fn support_bounds_n(cs: &CharacteristicSet, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    bounds(&cs.labels, &cs.xi, alpha, beta)
}

/// A PDE run with characteristics tracked alongside.
#[derive(Debug, Clone)]
pub struct TrackedRun {
    pub trajectory: Trajectory<f64>,
    /// One set per snapshot, at the same times.
    pub characteristics: Vec<CharacteristicSet>,
}

/// Evolves the PDE and both flows together. Mid-step velocities come from
/// cubic Hermite interpolation of the momenta between step ends.
pub fn track(
    solver: &Solver,
    state: &PdeState<f64>,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
    label_stride: usize,
) -> Result<TrackedRun, Interrupted<TrackedRun>> {
    let start_run = || -> Result<(CharacteristicSet, Vec<(f64, usize, f64)>)> {
        let cs = CharacteristicSet::on_grid(state.t, state.grid(), label_stride)?;
        let plan = step_schedule(state.t, t_end, dt, output_times)?;
        Ok((cs, plan))
    };
    let mut run = TrackedRun {
        trajectory: Trajectory::new(state.clone()),
        characteristics: Vec::new(),
    };
    let (mut cs, plan) = match start_run() {
        Ok(x) => x,
        Err(error) => return Err(Interrupted { partial: run, error }),
    };
    run.characteristics.push(cs.clone());
    let mut stepper = solver.clone();
    stepper.options.blowup_threshold = Some(
        solver
            .options
            .blowup_threshold
            .unwrap_or_else(|| default_blowup_threshold(state)),
    );
    let dealias = solver.options.dealias;
    let mut current = state.clone();
    let step_once = |current: &PdeState<f64>,
                         cs: &CharacteristicSet,
                         h: f64|
     -> Result<(PdeState<f64>, CharacteristicSet)> {
        let next = stepper.step_rk4(current, h)?;
        let (k0m, k0n) = rhs_momentum(current, dealias)?;
        let (k1m, k1n) = rhs_momentum(&next, dealias)?;
        let hermite = |a: &Field<f64>, b: &Field<f64>, ka: &Field<f64>, kb: &Field<f64>| {
            let mut out = a.clone();
            for (j, o) in out.samples_mut().iter_mut().enumerate() {
                *o = 0.5 * (a.samples()[j] + b.samples()[j])
                    + h / 8.0 * (ka.samples()[j] - kb.samples()[j]);
            }
            out
        };
        let m_mid = hermite(&current.m, &next.m, &k0m, &k1m);
        let n_mid = hermite(&current.n, &next.n, &k0n, &k1n);
        let s0 = VelocityStage::from_momenta(&current.m, &current.n)?;
        let sm = VelocityStage::from_momenta(&m_mid, &n_mid)?;
        let s1 = VelocityStage::from_momenta(&next.m, &next.n)?;
        let cs_next = advect_staged(cs, &s0, &sm, &s1, h)?;
        Ok((next, cs_next))
    };
    for (target, steps, h) in plan {
        for _ in 0..steps {
            match step_once(&current, &cs, h) {
                Ok((next, cs_next)) => {
                    current = next;
                    cs = cs_next;
                }
                Err(error) => return Err(Interrupted { partial: run, error }),
            }
        }
        current.t = target;
        cs.t = target;
        if let Err(error) = run.trajectory.push(current.clone()) {
            return Err(Interrupted { partial: run, error });
        }
        run.characteristics.push(cs.clone());
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics_and_nodes() {
        let g = make_grid(10.0, 64).unwrap();
        let f = Field::from_fn(&g, |x| 0.5 * x * x * x - x + 2.0);
        for x in [-3.3, 0.0, 1.234, 4.9] {
            let exact = 0.5 * x * x * x - x + 2.0;
            assert!((interpolate_cubic(&f, x) - exact).abs() < 1e-10);
        }
        assert_eq!(interpolate_cubic(&f, g.node(17)), f.samples()[17]);
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = make_grid(10.0, 64).unwrap();
        let cs = CharacteristicSet::on_grid(0.0, &g, 4).unwrap();
        let z = Field::zeros(&g);
        let next = advect(&cs, &z, &z, 0.1).unwrap();
        assert_eq!(next.phi, cs.phi);
        assert!(next.phi_x.iter().all(|&j| j == 1.0));
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_velocity_translates() {
        let g = make_grid(10.0, 64).unwrap();
        let labels = vec![-2.0, 0.0, 3.0];
        let cs = CharacteristicSet::identity(0.0, labels.clone()).unwrap();
        let u = Field::from_fn(&g, |_| -1.0);
        let v = Field::from_fn(&g, |_| 0.5);
        let mut cur = cs;
        for _ in 0..10 {
            cur = advect(&cur, &u, &v, 0.1).unwrap();
        }
        for (i, x) in labels.iter().enumerate() {
            assert!((cur.phi[i] - (x + 0.5)).abs() < 1e-12);
            assert!((cur.xi[i] - (x - 1.0)).abs() < 1e-12);
            assert!((cur.phi_x[i] - 1.0).abs() < 1e-12);
        }
        let (a, b) = support_bounds_m(&cur, -1.0, 1.0).unwrap();
        assert!((a + 0.5).abs() < 1e-12 && (b - 1.5).abs() < 1e-12);
    }

    #[test]
    fn leaving_the_window_is_a_domain_error() {
        let g = make_grid(5.0, 32).unwrap();
        let cs = CharacteristicSet::identity(0.0, vec![4.9]).unwrap();
        let v = Field::from_fn(&g, |_| 1.0);
        assert!(matches!(advect(&cs, &v, &v, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn support_bounds_rejects_outside_labels() {
        let cs = CharacteristicSet::identity(0.0, vec![-1.0, 0.0, 1.0]).unwrap();
        assert!(support_bounds_m(&cs, -2.0, 0.5).is_err());
        assert!(support_bounds_m(&cs, 0.5, 0.2).is_err());
        assert_eq!(support_bounds_n(&cs, -0.5, 0.5).unwrap(), (-0.5, 0.5));
    }

    #[test]
    fn pullback_is_zero_at_start_and_checks_time() {
        let g = make_grid(10.0, 64).unwrap();
        let m = Field::from_fn(&g, |x| (-x * x).exp());
        let s = PdeState::coupled(m.clone(), m).unwrap();
        let cs = CharacteristicSet::on_grid(0.0, &g, 4).unwrap();
        assert_eq!(pullback_residual(&s, &cs, &s).unwrap().max(), 0.0);
        let mut late = cs.clone();
        late.t = 1.0;
        assert!(pullback_residual(&s, &late, &s).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences_in_shear() {
        let g = make_grid(10.0, 256).unwrap();
        let v = Field::from_fn(&g, |x| 0.3 * (0.5 * x).sin() * (-0.05 * x * x).exp());
        let cs = CharacteristicSet::on_grid(0.0, &g, 1).unwrap();
        let mut cur = CharacteristicSet::identity(0.0, cs.labels[40..216].to_vec()).unwrap();
        for _ in 0..20 {
            cur = advect(&cur, &v, &v, 0.05).unwrap();
        }
        let (dp, dx) = cur.jacobian_fd_discrepancy();
        assert!(dp < 1e-3 && dx < 1e-3, "{dp} {dx}");
        assert!(cur.is_monotone());
    }
}
