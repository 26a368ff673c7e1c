//! Conserved and monitored quantities of a snapshot.
//!
//! Exponential moments `E^u_+- = int e^{+-y} m dy` and `E^v_+- = int e^{+-y} n dy`
//! are integrated over the epsilon-support of the momentum (padded by a few
//! nodes). Outside that support the momentum is round-off, and the weights
//! `e^{+-y}` would otherwise amplify it by up to `e^L`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Scalar};
use crate::kernel::{decompose_profile, Quadrature};
use crate::solver::{recover_velocity, PdeState};
use crate::spectral::{helmholtz_inverse, spectral_derivative};

/// Default support threshold relative to the initial maximum.
pub const DEFAULT_EPSILON_REL: f64 = 1e-10;
/// Default bound on [`boundary_contamination`].
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
/// Width of the edge band inspected by [`boundary_contamination`].
pub const EDGE_BAND: f64 = 2.0;
/// Nodes added on each side of the support when integrating moments.
const SUPPORT_PAD: usize = 2;
/// Minimum number of nodes in a tail fit.
pub const MIN_TAIL_NODES: usize = 10;

/// `int (u v + u_x v_x) dx`.
pub fn energy_h(u: &Field<f64>, v: &Field<f64>) -> Result<f64> {
    u.grid().ensure_same(v.grid(), "energy_h")?;
    let ux = spectral_derivative(u)?;
    let vx = spectral_derivative(v)?;
    let h = u.grid().spacing();
    let sum: f64 = (0..u.len())
        .map(|j| u.samples()[j] * v.samples()[j] + ux.samples()[j] * vx.samples()[j])
        .sum();
    Ok(sum * h)
}

/// `1/2 int (|u|^2 + |u_x|^2) dx` for the complex reduction.
pub fn energy_h_complex(u: &Field<Complex64>) -> Result<f64> {
    let ux = spectral_derivative(u)?;
    let h = u.grid().spacing();
    let sum: f64 = (0..u.len())
        .map(|j| u.samples()[j].norm_sqr() + ux.samples()[j].norm_sqr())
        .sum();
    Ok(0.5 * sum * h)
}

/// `Re int (m + n) dx`. In the complex reduction this is `2 Re int m`.
pub fn momentum_p<T: Scalar>(m: &Field<T>, n: &Field<T>) -> Result<f64> {
    m.grid().ensure_same(n.grid(), "momentum_p")?;
    Ok((m.integral() + n.integral()).re())
}

/// Smallest node interval containing every `|f| > epsilon`; `None` when
/// there is no such node.
pub fn support_measure<T: Scalar>(f: &Field<T>, epsilon: f64) -> Option<(f64, f64)> {
    let (lo, hi) = support_indices(f, epsilon)?;
    Some((f.grid().node(lo), f.grid().node(hi)))
}

fn support_indices<T: Scalar>(f: &Field<T>, epsilon: f64) -> Option<(usize, usize)> {
    let s = f.samples();
    let lo = s.iter().position(|v| v.modulus() > epsilon)?;
    let hi = s.iter().rposition(|v| v.modulus() > epsilon)?;
    Some((lo, hi))
}

/// Largest velocity within [`EDGE_BAND`] of either window edge, relative to
/// the largest velocity anywhere. 0 for vanishing fields.
pub fn boundary_contamination<T: Scalar>(u: &Field<T>, v: &Field<T>) -> f64 {
    let grid = u.grid();
    let l = grid.half_length();
    let peak = u.max_abs().max(v.max_abs());
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0_f64;
    for (j, &x) in grid.nodes().iter().enumerate() {
        if x.abs() >= l - EDGE_BAND {
            edge = edge.max(u.samples()[j].modulus()).max(v.samples()[j].modulus());
        }
    }
    edge / peak
}

/// Thresholds that turn raw fields into support and moment measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsContext {
    pub epsilon_m: f64,
    pub epsilon_n: f64,
    pub epsilon_u: f64,
    pub epsilon_v: f64,
    pub tail_tolerance: f64,
}

impl DiagnosticsContext {
    /// Thresholds `epsilon_rel * max|f0|` for each of `m, n, u, v` at the
    /// initial state.
    pub fn from_initial<T: Scalar>(
        initial: &PdeState<T>,
        epsilon_rel: f64,
        tail_tolerance: f64,
    ) -> Result<Self> {
        if !(epsilon_rel > 0.0 && tail_tolerance > 0.0) {
            return Err(Error::config(
                "epsilon_support",
                "thresholds must be positive",
            ));
        }
        let (u, v) = recover_velocity(initial)?;
        let eps = |f: f64| (epsilon_rel * f).max(f64::MIN_POSITIVE);
        Ok(DiagnosticsContext {
            epsilon_m: eps(initial.m.max_abs()),
            epsilon_n: eps(initial.n.max_abs()),
            epsilon_u: eps(u.max_abs()),
            epsilon_v: eps(v.max_abs()),
            tail_tolerance,
        })
    }
}

/// The four exponential moments. In the complex reduction the `v` moments
/// are the conjugates of the `u` moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoments<T> {
    pub eu_plus: T,
    pub eu_minus: T,
    pub ev_plus: T,
    pub ev_minus: T,
}

/// `(int e^x f, int e^{-x} f)` over the padded epsilon-support of `f`.
fn weighted_pair<T: Scalar>(f: &Field<T>, epsilon: f64) -> (T, T) {
    let zero = T::from_real(0.0);
    let Some((lo, hi)) = support_indices(f, epsilon) else {
        return (zero, zero);
    };
    let n = f.len();
    let lo = lo.saturating_sub(SUPPORT_PAD);
    let hi = (hi + SUPPORT_PAD).min(n - 1);
    let grid = f.grid();
    let h = grid.spacing();
    let (mut plus, mut minus) = (zero, zero);
    for j in lo..=hi {
        let x = grid.node(j);
        let s = f.samples()[j];
        plus = plus + s * x.exp();
        minus = minus + s * (-x).exp();
    }
    (plus * h, minus * h)
}

fn ensure_uncontaminated<T: Scalar>(u: &Field<T>, v: &Field<T>, tolerance: f64) -> Result<f64> {
    let c = boundary_contamination(u, v);
    if c > tolerance {
        return Err(Error::Domain(format!(
            "boundary contamination {c:.3e} exceeds {tolerance:.3e}; enlarge the window"
        )));
    }
    Ok(c)
}

/// Exponential moments of `m` and `n`. Fails with a domain error when the
/// velocities are not negligible at the window edges.
pub fn exp_moments<T: Scalar>(
    m: &Field<T>,
    n: &Field<T>,
    ctx: &DiagnosticsContext,
) -> Result<ExpMoments<T>> {
    m.grid().ensure_same(n.grid(), "exp_moments")?;
    let u = helmholtz_inverse(m)?;
    let v = helmholtz_inverse(n)?;
    ensure_uncontaminated(&u, &v, ctx.tail_tolerance)?;
    let (eu_plus, eu_minus) = weighted_pair(m, ctx.epsilon_m);
    let (ev_plus, ev_minus) = weighted_pair(n, ctx.epsilon_n);
    Ok(ExpMoments {
        eu_plus,
        eu_minus,
        ev_plus,
        ev_minus,
    })
}

/// `(int e^x m, int e^{-x} m)`. Both vanish exactly when
/// `u = (1 - d^2)^{-1} m` has compact support.
pub fn zero_integral_check(m: &Field<f64>, epsilon: f64, tail_tolerance: f64) -> Result<(f64, f64)> {
    let u = helmholtz_inverse(m)?;
    ensure_uncontaminated(&u, &u, tail_tolerance)?;
    Ok(weighted_pair(m, epsilon))
}

/// Pointwise `2 u v + u_x v_x`, the density whose exponential moments give
/// the moment rates.
pub fn rate_density(u: &Field<f64>, v: &Field<f64>) -> Result<Field<f64>> {
    u.grid().ensure_same(v.grid(), "rate_density")?;
    let ux = spectral_derivative(u)?;
    let vx = spectral_derivative(v)?;
    let mut out = u.clone();
    for (j, o) in out.samples_mut().iter_mut().enumerate() {
        *o = 2.0 * u.samples()[j] * v.samples()[j] + ux.samples()[j] * vx.samples()[j];
    }
    Ok(out)
}

/// The same density through the one-sided convolutions `u = I1 + I2`:
/// `3 I1u I1v + I2u I1v + I1u I2v + 3 I2u I2v`. Nonnegative for
/// nonnegative momenta.
pub fn decomposed_rate_density(
    m: &Field<f64>,
    n: &Field<f64>,
    rule: Quadrature,
) -> Result<Field<f64>> {
    m.grid().ensure_same(n.grid(), "decomposed_rate_density")?;
    let (i1u, i2u) = decompose_profile(m, rule);
    let (i1v, i2v) = decompose_profile(n, rule);
    let samples = (0..m.len())
        .map(|j| {
            3.0 * i1u[j] * i1v[j] + i2u[j] * i1v[j] + i1u[j] * i2v[j] + 3.0 * i2u[j] * i2v[j]
        })
        .collect();
    Field::from_samples(m.grid(), samples)
}

/// `(int e^y (2uv + u_x v_x), -int e^{-y} (2uv + u_x v_x))`: the exact rates
/// of `E_+` and `E_-`.
pub fn moment_rates(u: &Field<f64>, v: &Field<f64>) -> Result<(f64, f64)> {
    let d = rate_density(u, v)?;
    let grid = u.grid();
    let h = grid.spacing();
    let (mut plus, mut minus) = (0.0, 0.0);
    for (j, &x) in grid.nodes().iter().enumerate() {
        plus += x.exp() * d.samples()[j];
        minus += (-x).exp() * d.samples()[j];
    }
    Ok((plus * h, -minus * h))
}

/// Result of comparing finite-difference moment rates with [`moment_rates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck {
    pub quadrature_plus: f64,
    pub quadrature_minus: f64,
    /// `|fd - quadrature| / max(|quadrature|, floor)`.
    pub discrepancy_plus: f64,
    pub discrepancy_minus: f64,
}

/// Relative gap between finite-difference rates of `E_+-` and their exact
/// quadrature expressions. `floor` keeps the ratio finite for vanishing
/// rates.
pub fn moment_rate_check(
    u: &Field<f64>,
    v: &Field<f64>,
    de_plus_dt_fd: f64,
    de_minus_dt_fd: f64,
    floor: f64,
) -> Result<RateCheck> {
    let (qp, qm) = moment_rates(u, v)?;
    ensure_uncontaminated(u, v, f64::INFINITY)?;
    let rel = |fd: f64, q: f64| {
        let denom = q.abs().max(floor);
        if denom == 0.0 {
            (fd - q).abs()
        } else {
            (fd - q).abs() / denom
        }
    };
    Ok(RateCheck {
        quadrature_plus: qp,
        quadrature_minus: qm,
        discrepancy_plus: rel(de_plus_dt_fd, qp),
        discrepancy_minus: rel(de_minus_dt_fd, qm),
    })
}

/// Which tail of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Indices of the tail window: nodes strictly beyond `support_edge` whose
/// magnitude exceeds `max(1e2 eps, 1e-8 max|u|)`, up to the first node that
/// does not.
fn tail_window(u: &Field<f64>, side: Side, support_edge: f64) -> Result<Vec<usize>> {
    let grid = u.grid();
    let floor = (1e2 * f64::EPSILON).max(1e-8 * u.max_abs());
    let idx: Vec<usize> = match side {
        Side::Right => (0..u.len())
            .filter(|&j| grid.node(j) > support_edge)
            .take_while(|&j| u.samples()[j].abs() > floor)
            .collect(),
        Side::Left => (0..u.len())
            .rev()
            .filter(|&j| grid.node(j) < support_edge)
            .take_while(|&j| u.samples()[j].abs() > floor)
            .collect(),
    };
    if idx.len() < MIN_TAIL_NODES {
        return Err(Error::Measurement(format!(
            "only {} qualifying tail nodes beyond {support_edge}",
            idx.len()
        )));
    }
    Ok(idx)
}

/// Least-squares slope of `ln|u|` against `x` on the tail beyond
/// `support_edge`. Pure exponential tails give -1 on the right and +1 on
/// the left.
pub fn tail_slope(u: &Field<f64>, side: Side, support_edge: f64) -> Result<f64> {
    let idx = tail_window(u, side, support_edge)?;
    let grid = u.grid();
    let n = idx.len() as f64;
    let xs: Vec<f64> = idx.iter().map(|&j| grid.node(j)).collect();
    let ys: Vec<f64> = idx.iter().map(|&j| u.samples()[j].abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Tail amplitude `u e^{x}` (right) or `u e^{-x}` (left) over the tail
/// window: `(mean, relative spread)`. On the right it should equal
/// `E^u_+ / 2`, on the left `E^u_- / 2`.
pub fn tail_coefficient(u: &Field<f64>, side: Side, support_edge: f64) -> Result<(f64, f64)> {
    let idx = tail_window(u, side, support_edge)?;
    let grid = u.grid();
    let sign = if side == Side::Right { 1.0 } else { -1.0 };
    let vals: Vec<f64> = idx
        .iter()
        .map(|&j| u.samples()[j] * (sign * grid.node(j)).exp())
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((mean, (hi - lo) / mean.abs()))
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub h: f64,
    pub p: f64,
    /// Moments are `None` when boundary contamination invalidates them.
    pub eu_plus: Option<f64>,
    pub eu_minus: Option<f64>,
    pub ev_plus: Option<f64>,
    pub ev_minus: Option<f64>,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    pub supp_m: Option<(f64, f64)>,
    pub supp_n: Option<(f64, f64)>,
    pub supp_u: Option<(f64, f64)>,
    pub supp_v: Option<(f64, f64)>,
    pub tail_slope_left: Option<f64>,
    pub tail_slope_right: Option<f64>,
    /// `max(|m|, |n|)`.
    pub max_abs: f64,
    pub boundary_contamination: f64,
    pub pullback_residual: Option<f64>,
}

impl DiagnosticsRecord {
    /// True when the exponential moments could be trusted.
    pub fn moments_valid(&self) -> bool {
        self.e_plus.is_some()
    }
}

/// Builds the record of one snapshot. Real parts are stored for complex
/// states; in the complex reduction `E_+ = 2 Re int e^y m`.
pub fn record<T: Scalar>(state: &PdeState<T>, ctx: &DiagnosticsContext) -> Result<DiagnosticsRecord> {
    let (u, v) = recover_velocity(state)?;
    let h = if T::IS_COMPLEX {
        energy_h_complex(&u.map(|s| s.to_complex()))?
    } else {
        energy_h(&u.map(|s| s.re()), &v.map(|s| s.re()))?
    };
    let p = momentum_p(&state.m, &state.n)?;
    let contamination = boundary_contamination(&u, &v);
    let moments = if contamination <= ctx.tail_tolerance {
        let (eup, eum) = weighted_pair(&state.m, ctx.epsilon_m);
        let (evp, evm) = weighted_pair(&state.n, ctx.epsilon_n);
        Some((eup.re(), eum.re(), evp.re(), evm.re()))
    } else {
        None
    };
    let supp_m = support_measure(&state.m, ctx.epsilon_m);
    let supp_n = support_measure(&state.n, ctx.epsilon_n);
    let tail_field = u.map(|s| s.modulus());
    let (slope_l, slope_r) = match supp_m {
        Some((lo, hi)) if contamination <= ctx.tail_tolerance => (
            tail_slope(&tail_field, Side::Left, lo).ok(),
            tail_slope(&tail_field, Side::Right, hi).ok(),
        ),
        _ => (None, None),
    };
    Ok(DiagnosticsRecord {
        t: state.t,
        h,
        p,
        eu_plus: moments.map(|m| m.0),
        eu_minus: moments.map(|m| m.1),
        ev_plus: moments.map(|m| m.2),
        ev_minus: moments.map(|m| m.3),
        e_plus: moments.map(|m| m.0 + m.2),
        e_minus: moments.map(|m| m.1 + m.3),
        supp_m,
        supp_n,
        supp_u: support_measure(&u, ctx.epsilon_u),
        supp_v: support_measure(&v, ctx.epsilon_v),
        tail_slope_left: slope_l,
        tail_slope_right: slope_r,
        max_abs: state.max_abs(),
        boundary_contamination: contamination,
        pullback_residual: None,
    })
}

/// `max |x_k - x_0| / max(|x_0|, floor)` over a series.
pub fn relative_drift(values: &[f64], floor: f64) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = first.abs().max(floor);
    values
        .iter()
        .map(|v| (v - first).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Every consecutive pair strictly increases.
pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

/// Every consecutive pair strictly decreases.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Smallest sample divided by the largest magnitude of a reference field:
/// negative values measure sign violations of a nonnegative field.
pub fn min_relative_to(f: &Field<f64>, reference_max: f64) -> f64 {
    let min = f.samples().iter().copied().fold(f64::INFINITY, f64::min);
    if reference_max == 0.0 {
        min
    } else {
        min / reference_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::{E, PI};

    fn bump(x: f64, c: f64, w: f64, a: f64) -> f64 {
        let s = (x - c) / w;
        if s.abs() < 1.0 {
            a * (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn energy_of_sines() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        assert!((energy_h(&u, &u).unwrap() - 2.0 * PI).abs() < 1e-12);
        let z = Field::zeros(&g);
        assert_eq!(energy_h(&z, &z).unwrap(), 0.0);
        let uc = u.to_complex();
        assert!((energy_h_complex(&uc).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn momentum_of_deltas() {
        let g = make_grid(10.0, 128).unwrap();
        let m = Field::discrete_delta(&g, 64, 10.0);
        let n = Field::discrete_delta(&g, 70, 1.0);
        assert!((momentum_p(&m, &n).unwrap() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_indicator() {
        let g = make_grid(8.0, 4096).unwrap();
        // Half weights at the ends give the trapezoid rule on [0, 1].
        let m = Field::from_fn(&g, |x| {
            if x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12 {
                0.5
            } else if x > 0.0 && x < 1.0 {
                1.0
            } else {
                0.0
            }
        });
        let (p, q) = weighted_pair(&m, 0.25);
        assert!((p - (E - 1.0)).abs() < 1e-5, "{p}");
        assert!((q - (1.0 - 1.0 / E)).abs() < 1e-5, "{q}");
        let z = Field::<f64>::zeros(&g);
        let ctx = DiagnosticsContext {
            epsilon_m: 1e-12,
            epsilon_n: 1e-12,
            epsilon_u: 1e-12,
            epsilon_v: 1e-12,
            tail_tolerance: 1e-8,
        };
        let mz = exp_moments(&z, &z, &ctx).unwrap();
        assert_eq!(mz.eu_plus + mz.ev_minus, 0.0);
    }

    #[test]
    fn support_of_indicator() {
        let g = make_grid(10.0, 256).unwrap();
        let f = Field::from_fn(&g, |x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 });
        let (a, b) = support_measure(&f, 0.5).unwrap();
        assert!(a.abs() <= g.spacing() && (b - 1.0).abs() <= g.spacing());
        assert!(support_measure(&Field::<f64>::zeros(&g), 0.5).is_none());
    }

    #[test]
    fn tail_slopes_of_exponentials() {
        let g = make_grid(20.0, 512).unwrap();
        let r = Field::from_fn(&g, |x| (-x.abs()).exp() * 1e-3);
        assert!((tail_slope(&r, Side::Right, 0.0).unwrap() + 1.0).abs() < 1e-12);
        let l = Field::from_fn(&g, |x| (-x.abs()).exp() * 1e-3);
        assert!((tail_slope(&l, Side::Left, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let flat = Field::from_fn(&g, |x| if x < 19.0 { 1.0 } else { 0.0 });
        assert!(matches!(
            tail_slope(&flat, Side::Right, 18.9),
            Err(Error::Measurement(_))
        ));
    }

    #[test]
    fn decomposed_density_matches_pointwise() {
        let g = make_grid(30.0, 2048).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, -2.0, 5.0, 1.0));
        let n = Field::from_fn(&g, |x| bump(x, 2.0, 5.0, 0.5));
        let u = helmholtz_inverse(&m).unwrap();
        let v = helmholtz_inverse(&n).unwrap();
        let direct = rate_density(&u, &v).unwrap();
        let split = decomposed_rate_density(&m, &n, Quadrature::EndCorrected).unwrap();
        assert!(direct.max_abs_diff(&split) < 1e-5 * direct.max_abs());
        assert!(split.samples().iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn zero_integrals_of_compact_velocity() {
        let g = make_grid(30.0, 2048).unwrap();
        let u = Field::from_fn(&g, |x| bump(x, 0.0, 5.0, 1.0));
        let m = crate::spectral::helmholtz_forward(&u).unwrap();
        let (p, q) = zero_integral_check(&m, 1e-10 * m.max_abs(), 1e-8).unwrap();
        // Spectral m carries global ripple, so only a loose bound here.
        assert!(p.abs() < 1e-3 && q.abs() < 1e-3, "{p} {q}");
        let b = Field::from_fn(&g, |x| bump(x, 0.0, 3.0, 1.0));
        let (p, q) = zero_integral_check(&b, 1e-10, 1e-8).unwrap();
        assert!(p > 0.0 && q > 0.0);
    }

    #[test]
    fn contamination_flags_wide_fields() {
        let g = make_grid(5.0, 256).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 0.0, 4.0, 1.0));
        let ctx = DiagnosticsContext {
            epsilon_m: 1e-10,
            epsilon_n: 1e-10,
            epsilon_u: 1e-10,
            epsilon_v: 1e-10,
            tail_tolerance: 1e-8,
        };
        assert!(matches!(exp_moments(&m, &m, &ctx), Err(Error::Domain(_))));
        let s = PdeState::coupled(m.clone(), m).unwrap();
        let rec = record(&s, &ctx).unwrap();
        assert!(!rec.moments_valid());
        assert!(rec.boundary_contamination > 1e-8);
    }

    #[test]
    fn verdict_helpers() {
        assert!(strictly_increasing(&[1.0, 2.0, 3.0]));
        assert!(!strictly_increasing(&[1.0, 1.0]));
        assert!(strictly_decreasing(&[3.0, 2.0]));
        assert!((relative_drift(&[2.0, 2.1, 1.8], 1e-30) - 0.1).abs() < 1e-12);
    }
}
