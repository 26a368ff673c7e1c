//! Uniform periodic grid on `[-L, L)` and sampled fields.
//!
//! The grid carries its FFT plans so that every [`Field`] can be moved to
//! and from Fourier space without re-planning. Cloning a grid is cheap.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Sample type of a [`Field`]: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    const IS_COMPLEX: bool;
    fn to_complex(self) -> Complex64;
    /// Real types drop the imaginary part.
    fn from_complex(c: Complex64) -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    #[inline]
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
    #[inline]
    fn from_complex(c: Complex64) -> Self {
        c
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

struct GridInner {
    half_length: f64,
    n_points: usize,
    spacing: f64,
    nodes: Vec<f64>,
    /// Angular wavenumbers in FFT order: `pi * j / L`, `j = 0..N/2, -N/2+1..-1`.
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic window `[-half_length, half_length)` with `n_points` nodes.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    /// Builds the grid. `n_points` must be a power of two, at least 16.
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::config(
                "half_length",
                format!("must be a positive finite number, got {half_length}"),
            ));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::config(
                "n_points",
                format!("must be a power of two >= 16, got {n_points}"),
            ));
        }
        let spacing = 2.0 * half_length / n_points as f64;
        let nodes = (0..n_points)
            .map(|j| -half_length + j as f64 * spacing)
            .collect();
        let wavenumbers = (0..n_points)
            .map(|j| {
                let signed = if j <= n_points / 2 {
                    j as f64
                } else {
                    j as f64 - n_points as f64
                };
                std::f64::consts::PI * signed / half_length
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Grid {
            inner: Arc::new(GridInner {
                half_length,
                n_points,
                spacing,
                nodes,
                wavenumbers,
                forward,
                inverse,
            }),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn n_points(&self) -> usize {
        self.inner.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.inner.nodes[j]
    }

    pub(crate) fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Index of the Nyquist mode in FFT order.
    pub(crate) fn nyquist(&self) -> usize {
        self.inner.n_points / 2
    }

    /// Maps `x` into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.inner.half_length;
        (x + l).rem_euclid(2.0 * l) - l
    }

    /// Unnormalised forward transform in place.
    pub(crate) fn fft(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
    }

    /// Normalised inverse transform in place.
    pub(crate) fn ifft(&self, buf: &mut [Complex64]) {
        self.inner.inverse.process(buf);
        let scale = 1.0 / self.inner.n_points as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    /// Same window and resolution.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n_points == other.inner.n_points
                && self.inner.half_length == other.inner.half_length)
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{what}: grid mismatch (L={}, N={} vs L={}, N={})",
                self.half_length(),
                self.n_points(),
                other.half_length(),
                other.n_points()
            )))
        }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.inner.half_length)
            .field("n_points", &self.inner.n_points)
            .field("spacing", &self.inner.spacing)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Samples of a real or complex function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T: Scalar = f64> {
    grid: Grid,
    samples: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            grid: grid.clone(),
            samples: vec![T::default(); grid.n_points()],
        }
    }

    pub fn from_samples(grid: &Grid, samples: Vec<T>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::Contract(format!(
                "field has {} samples but grid has {} nodes",
                samples.len(),
                grid.n_points()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            samples,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> T) -> Self {
        Field {
            grid: grid.clone(),
            samples: grid.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    /// `1/spacing` times `weight` at node `index`, zero elsewhere.
    pub fn discrete_delta(grid: &Grid, index: usize, weight: T) -> Self {
        let mut out = Self::zeros(grid);
        out.samples[index] = weight * (1.0 / grid.spacing());
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }

    pub(crate) fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numeric(format!("{what}: non-finite sample")))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, s| acc.max(s.modulus()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|&s| f(s)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field<T>, f: impl Fn(T, T) -> T) -> Result<Field<T>> {
        self.grid.ensure_same(&other.grid, "zip_with")?;
        Ok(Field {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self + scale * other` without grid checks; callers guarantee grids match.
    pub(crate) fn axpy(&self, scale: f64, other: &Field<T>) -> Field<T> {
        Field {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| a + b * scale)
                .collect(),
        }
    }

    pub fn conj(&self) -> Field<T> {
        self.map(Scalar::conj)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Field<T>) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |acc, (&a, &b)| acc.max((a - b).modulus()))
    }

    /// Rectangle-rule integral; equal to the trapezoid rule on a periodic grid.
    pub fn integral(&self) -> T {
        let h = self.grid.spacing();
        self.samples
            .iter()
            .fold(T::default(), |acc, &s| acc + s)
            * h
    }
}

impl Field<f64> {
    pub fn to_complex(&self) -> Field<Complex64> {
        self.map(|x| Complex64::new(x, 0.0))
    }
}

impl Field<Complex64> {
    pub fn real_part(&self) -> Field<f64> {
        self.map(|c| c.re)
    }

    pub fn imag_part(&self) -> Field<f64> {
        self.map(|c| c.im)
    }

    pub fn from_parts(re: &Field<f64>, im: &Field<f64>) -> Result<Self> {
        re.grid.ensure_same(&im.grid, "from_parts")?;
        Ok(Field {
            grid: re.grid.clone(),
            samples: re
                .samples
                .iter()
                .zip(&im.samples)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        })
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(half_length: f64, n_points: usize) -> Result<Grid> {
    Grid::new(half_length, n_points)
}
