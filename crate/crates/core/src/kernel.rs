//! Green function of `1 - d^2/dx^2` and direct-quadrature convolutions.
//!
//! On the line the kernel is `exp(-|x|)/2`. On the periodic window
//! `[-L, L)` it becomes `cosh(L - |x|) / (2 sinh L)`, which is what
//! [`helmholtz_inverse`](crate::spectral::helmholtz_inverse) inverts exactly.
//! Everything here is computed in physical space so that it can serve as an
//! oracle for the Fourier path.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::par;

/// Periodised Green function `cosh(L - |x|) / (2 sinh L)` for `|x| <= L`.
///
/// Written in a form that does not overflow for large `L`.
pub fn green_kernel_eval(x: f64, half_length: f64) -> f64 {
    let a = x.abs();
    let l = half_length;
    let tail = (-2.0 * l).exp();
    ((-a).exp() + (a - 2.0 * l).exp()) / (2.0 * (1.0 - tail))
}

/// `d/dx` of [`green_kernel_eval`], with the value 0 at the kink.
pub fn green_kernel_derivative(x: f64, half_length: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    let l = half_length;
    let tail = (-2.0 * l).exp();
    -x.signum() * ((-a).exp() - (a - 2.0 * l).exp()) / (2.0 * (1.0 - tail))
}

/// Line kernel `exp(-|x|)/2`.
#[inline]
pub fn line_kernel(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

/// Line kernel derivative with the odd convention `K'(0) = 0`.
#[inline]
pub fn line_kernel_derivative(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -0.5 * x.signum() * (-x.abs()).exp()
    }
}

/// Quadrature rule for the physical-space convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Composite trapezoid rule. Second order: the kernel's derivative
    /// jump at `y = x` leaves an error of `spacing^2 / 12 * f(x)`.
    #[default]
    Trapezoid,
    /// Trapezoid plus the leading Euler-Maclaurin correction at every
    /// interval endpoint (including the kink), fourth order for smooth input.
    EndCorrected,
}

fn kernel_table(grid: &Grid) -> Vec<f64> {
    let n = grid.n_points();
    let h = grid.spacing();
    let l = grid.half_length();
    (0..n)
        .map(|d| {
            let offset = if d <= n / 2 {
                d as f64 * h
            } else {
                (d as f64 - n as f64) * h
            };
            green_kernel_eval(offset, l)
        })
        .collect()
}

/// Direct-sum convolution of `f` with the periodised kernel.
///
/// This is the quadrature counterpart of
/// [`helmholtz_inverse`](crate::spectral::helmholtz_inverse).
pub fn convolve_green_quadrature(f: &Field<f64>, rule: Quadrature) -> Field<f64> {
    let grid = f.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let table = kernel_table(grid);
    let samples = f.samples();
    let out = par::map_range(n, |i| {
        let mut acc = 0.0;
        for (j, &fj) in samples.iter().enumerate() {
            acc += table[(i + n - j) % n] * fj;
        }
        let mut value = acc * h;
        if rule == Quadrature::EndCorrected {
            // the derivative of y -> p(x - y) f(y) jumps by f(x) at y = x
            value -= h * h / 12.0 * samples[i];
        }
        value
    });
    Field::from_samples(grid, out).expect("length preserved")
}

/// Fourth-order central difference of a periodic sample sequence.
fn periodic_fd_derivative(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    (0..n)
        .map(|j| {
            let at = |o: isize| samples[((j as isize + o).rem_euclid(n as isize)) as usize];
            (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
        })
        .collect()
}

/// Left and right pieces of the line convolution of `m` at node `x_index`:
///
/// `I1 = e^{-x}/2 * int_{-L}^{x} e^{y} m(y) dy`,
/// `I2 = e^{x}/2 * int_{x}^{L} e^{-y} m(y) dy`,
///
/// so that `u = I1 + I2` and `u_x = -I1 + I2` when `m` is negligible near
/// the window edges. The exponentials are combined as `e^{-|x-y|}` so
/// nothing overflows.
pub fn decompose_i1_i2(m: &Field<f64>, x_index: usize, rule: Quadrature) -> Result<(f64, f64)> {
    let grid = m.grid();
    let n = grid.n_points();
    if x_index >= n {
        return Err(Error::Contract(format!(
            "x_index {x_index} out of range for {n} nodes"
        )));
    }
    let h = grid.spacing();
    let l = grid.half_length();
    let x = grid.node(x_index);
    let s = m.samples();

    let mut i1 = 0.0;
    if x_index > 0 {
        for j in 0..=x_index {
            let w = if j == 0 || j == x_index { 0.5 } else { 1.0 };
            i1 += w * (-(x - grid.node(j))).exp() * s[j];
        }
        i1 *= 0.5 * h;
    }
    // the right piece ends at y = L, which carries the periodic value s[0]
    let mut i2 = 0.0;
    for j in x_index..n {
        let w = if j == x_index { 0.5 } else { 1.0 };
        i2 += w * (-(grid.node(j) - x)).exp() * s[j];
    }
    i2 += 0.5 * (-(l - x)).exp() * s[0];
    i2 *= 0.5 * h;

    if rule == Quadrature::EndCorrected {
        let ds = periodic_fd_derivative(s, h);
        let c = h * h / 12.0;
        // f1(y) = e^{-(x-y)} m(y) / 2 on [-L, x]
        let f1_b = 0.5 * (s[x_index] + ds[x_index]);
        let f1_a = 0.5 * (-(x + l)).exp() * (s[0] + ds[0]);
        i1 -= c * (f1_b - f1_a);
        // f2(y) = e^{-(y-x)} m(y) / 2 on [x, L]
        let f2_a = 0.5 * (ds[x_index] - s[x_index]);
        let f2_b = 0.5 * (-(l - x)).exp() * (ds[0] - s[0]);
        i2 -= c * (f2_b - f2_a);
    }
    Ok((i1, i2))
}

/// [`decompose_i1_i2`] at every node, by an O(N) recursion.
pub fn decompose_profile(m: &Field<f64>, rule: Quadrature) -> (Vec<f64>, Vec<f64>) {
    let grid = m.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let l = grid.half_length();
    let s = m.samples();
    let decay = (-h).exp();

    let mut i1 = vec![0.0; n];
    for i in 0..n - 1 {
        i1[i + 1] = decay * i1[i] + 0.25 * h * (decay * s[i] + s[i + 1]);
    }
    let mut i2 = vec![0.0; n];
    i2[n - 1] = 0.25 * h * (s[n - 1] + decay * s[0]);
    for i in (0..n - 1).rev() {
        i2[i] = decay * i2[i + 1] + 0.25 * h * (s[i] + decay * s[i + 1]);
    }

    if rule == Quadrature::EndCorrected {
        let ds = periodic_fd_derivative(s, h);
        let c = h * h / 12.0;
        for i in 0..n {
            let x = grid.node(i);
            if i > 0 {
                let f1_b = 0.5 * (s[i] + ds[i]);
                let f1_a = 0.5 * (-(x + l)).exp() * (s[0] + ds[0]);
                i1[i] -= c * (f1_b - f1_a);
            }
            let f2_a = 0.5 * (ds[i] - s[i]);
            let f2_b = 0.5 * (-(l - x)).exp() * (ds[0] - s[0]);
            i2[i] -= c * (f2_b - f2_a);
        }
    }
    (i1, i2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectral::{helmholtz_inverse, spectral_derivative};

    fn bump(x: f64, c: f64, w: f64, a: f64) -> f64 {
        let s = (x - c) / w;
        if s.abs() < 1.0 {
            a * (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn kernel_limits() {
        assert!((green_kernel_eval(0.0, 30.0) - 0.5).abs() < 1e-10);
        assert!((green_kernel_eval(2f64.ln(), 30.0) - 0.25).abs() < 1e-10);
        let expect = 1f64.cosh() / (2.0 * 2f64.sinh());
        assert!((green_kernel_eval(1.0, 2.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn kernel_does_not_overflow() {
        let v = green_kernel_eval(3.0, 2000.0);
        assert!((v - 0.5 * (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_even_and_decreasing() {
        let l = 4.0;
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 * l / 400.0).collect();
        for w in xs.windows(2) {
            assert!(green_kernel_eval(w[1], l) < green_kernel_eval(w[0], l));
        }
        for &x in &xs {
            assert_eq!(green_kernel_eval(x, l), green_kernel_eval(-x, l));
        }
    }

    #[test]
    fn kernel_derivative_matches_finite_difference() {
        let l = 3.0;
        for &x in &[-2.5, -0.7, 0.3, 1.9] {
            let eps = 1e-6;
            let fd = (green_kernel_eval(x + eps, l) - green_kernel_eval(x - eps, l)) / (2.0 * eps);
            assert!((green_kernel_derivative(x, l) - fd).abs() < 1e-8);
        }
        assert_eq!(green_kernel_derivative(0.0, l), 0.0);
    }

    #[test]
    fn quadrature_of_zero() {
        let g = make_grid(10.0, 64).unwrap();
        let z = Field::zeros(&g);
        assert_eq!(convolve_green_quadrature(&z, Quadrature::Trapezoid).max_abs(), 0.0);
        assert_eq!(decompose_i1_i2(&z, 10, Quadrature::Trapezoid).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn quadrature_of_delta_is_kernel_profile() {
        let g = make_grid(30.0, 512).unwrap();
        let j0 = 200;
        let d = Field::discrete_delta(&g, j0, 1.0);
        let u = convolve_green_quadrature(&d, Quadrature::Trapezoid);
        let h = g.spacing();
        for (i, &ui) in u.samples().iter().enumerate() {
            let expect = green_kernel_eval(g.wrap(g.node(i) - g.node(j0)), 30.0);
            assert!((ui - expect).abs() <= h * h, "node {i}");
        }
    }

    #[test]
    fn trapezoid_error_is_second_order() {
        // the leading error is spacing^2/12 * max|f|; check it shrinks 4x per halving
        let mut errs = Vec::new();
        for n in [256, 512, 1024] {
            let g = make_grid(30.0, n).unwrap();
            let f = Field::from_fn(&g, |x| bump(x, 0.0, 3.0, 1.0));
            let q = convolve_green_quadrature(&f, Quadrature::Trapezoid);
            let s = helmholtz_inverse(&f).unwrap();
            let err = q.max_abs_diff(&s);
            let h = g.spacing();
            assert!(err <= 1.01 * h * h / 12.0 * f.max_abs(), "n = {n}: {err}");
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn corrected_quadrature_matches_spectral_inverse() {
        let g = make_grid(30.0, 2048).unwrap();
        let f = Field::from_fn(&g, |x| bump(x, 1.0, 3.0, 1.0));
        let q = convolve_green_quadrature(&f, Quadrature::EndCorrected);
        let s = helmholtz_inverse(&f).unwrap();
        assert!(q.max_abs_diff(&s) < 1e-6);
    }

    #[test]
    fn decomposition_nonnegative_for_nonnegative_m() {
        let g = make_grid(20.0, 256).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, -1.0, 4.0, 2.0) + bump(x, 5.0, 1.0, 0.5));
        for i in (0..256).step_by(7) {
            let (a, b) = decompose_i1_i2(&m, i, Quadrature::Trapezoid).unwrap();
            assert!(a >= 0.0 && b >= 0.0);
        }
    }

    #[test]
    fn decomposition_reconstructs_u_and_ux() {
        let g = make_grid(30.0, 2048).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 0.0, 5.0, 1.0));
        let u = helmholtz_inverse(&m).unwrap();
        let ux = spectral_derivative(&u).unwrap();
        for i in (0..2048).step_by(37) {
            let (a, b) = decompose_i1_i2(&m, i, Quadrature::EndCorrected).unwrap();
            assert!((a + b - u.samples()[i]).abs() < 1e-5, "u at {i}");
            assert!((b - a - ux.samples()[i]).abs() < 1e-5, "u_x at {i}");
        }
    }

    #[test]
    fn profile_agrees_with_pointwise() {
        let g = make_grid(12.0, 256).unwrap();
        let m = Field::from_fn(&g, |x| bump(x, 2.0, 3.0, 1.0) - bump(x, -4.0, 2.0, 0.3));
        for rule in [Quadrature::Trapezoid, Quadrature::EndCorrected] {
            let (p1, p2) = decompose_profile(&m, rule);
            for i in [0, 1, 17, 128, 200, 255] {
                let (a, b) = decompose_i1_i2(&m, i, rule).unwrap();
                assert!((a - p1[i]).abs() < 1e-13, "{rule:?} I1 at {i}");
                assert!((b - p2[i]).abs() < 1e-13, "{rule:?} I2 at {i}");
            }
        }
    }

    #[test]
    fn decompose_rejects_bad_index() {
        let g = make_grid(1.0, 16).unwrap();
        assert!(decompose_i1_i2(&Field::zeros(&g), 16, Quadrature::Trapezoid).is_err());
    }
}
