//! Fourier-space operators on periodic fields: differentiation, the
//! Helmholtz operator `1 - d^2/dx^2` and its inverse, and two-thirds-rule
//! truncation.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Field, Grid, Scalar};

/// Unnormalised DFT of a field.
pub fn spectrum<T: Scalar>(f: &Field<T>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = f.samples().iter().map(|s| s.to_complex()).collect();
    f.grid().fft(&mut buf);
    buf
}

/// Inverse of [`spectrum`]. Real fields keep the real part.
pub fn from_spectrum<T: Scalar>(grid: &Grid, mut spec: Vec<Complex64>) -> Field<T> {
    grid.ifft(&mut spec);
    Field::from_samples(grid, spec.into_iter().map(T::from_complex).collect())
        .expect("spectrum length matches grid")
}

/// Multiplies each Fourier mode by `symbol(k)` and transforms back.
pub(crate) fn apply_symbol<T: Scalar>(
    grid: &Grid,
    spec: &[Complex64],
    symbol: impl Fn(usize, f64) -> Complex64,
) -> Field<T> {
    let ks = grid.wavenumbers();
    let out: Vec<Complex64> = spec
        .iter()
        .zip(ks)
        .enumerate()
        .map(|(j, (&c, &k))| c * symbol(j, k))
        .collect();
    from_spectrum(grid, out)
}

#[inline]
pub(crate) fn derivative_symbol(grid: &Grid) -> impl Fn(usize, f64) -> Complex64 + '_ {
    let nyq = grid.nyquist();
    move |j, k| {
        if j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k)
        }
    }
}

#[inline]
pub(crate) fn helmholtz_inverse_symbol(_j: usize, k: f64) -> Complex64 {
    Complex64::new(1.0 / (1.0 + k * k), 0.0)
}

/// `d/dx f`, exact for trigonometric polynomials resolved by the grid.
pub fn spectral_derivative<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    f.ensure_finite("spectral_derivative")?;
    let spec = spectrum(f);
    Ok(apply_symbol(f.grid(), &spec, derivative_symbol(f.grid())))
}

/// `d^2/dx^2 f`.
pub fn spectral_second_derivative<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    f.ensure_finite("spectral_second_derivative")?;
    let spec = spectrum(f);
    Ok(apply_symbol(f.grid(), &spec, |_, k| {
        Complex64::new(-k * k, 0.0)
    }))
}

/// Solves `(1 - d^2/dx^2) g = f` on the periodic window.
pub fn helmholtz_inverse<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    f.ensure_finite("helmholtz_inverse")?;
    let spec = spectrum(f);
    Ok(apply_symbol(f.grid(), &spec, helmholtz_inverse_symbol))
}

/// Applies `1 - d^2/dx^2`.
pub fn helmholtz_forward<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    f.ensure_finite("helmholtz_forward")?;
    let spec = spectrum(f);
    Ok(apply_symbol(f.grid(), &spec, |_, k| {
        Complex64::new(1.0 + k * k, 0.0)
    }))
}

/// Highest mode index kept by the two-thirds rule.
pub(crate) fn dealias_cutoff(grid: &Grid) -> usize {
    grid.n_points() / 3
}

/// Zeroes modes with `|j| > N/3` in an FFT-ordered spectrum.
pub(crate) fn truncate_two_thirds(grid: &Grid, spec: &mut [Complex64]) {
    let n = grid.n_points();
    let cutoff = dealias_cutoff(grid);
    for (j, c) in spec.iter_mut().enumerate() {
        let signed = if j <= n / 2 { j } else { n - j };
        if signed > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Two-thirds-rule projection of a field.
pub fn dealias<T: Scalar>(f: &Field<T>) -> Field<T> {
    let mut spec = spectrum(f);
    truncate_two_thirds(f.grid(), &mut spec);
    from_spectrum(f.grid(), spec)
}

/// Largest modulus among the modes the two-thirds rule removes, relative to
/// the largest mode overall.
pub fn high_mode_fraction<T: Scalar>(f: &Field<T>) -> f64 {
    let spec = spectrum(f);
    let n = f.grid().n_points();
    let cutoff = dealias_cutoff(f.grid());
    let mut hi = 0.0_f64;
    let mut all = 0.0_f64;
    for (j, c) in spec.iter().enumerate() {
        let signed = if j <= n / 2 { j } else { n - j };
        all = all.max(c.norm());
        if signed > cutoff {
            hi = hi.max(c.norm());
        }
    }
    if all == 0.0 {
        0.0
    } else {
        hi / all
    }
}
