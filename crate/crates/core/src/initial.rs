//! Initial profiles built from a small shape language.
//!
//! A profile is a signed sum of shapes, written for example
//! `bump(-2, 3, 1) - 0.5*gaussian(0, 1, 1)`:
//!
//! * `bump(c, w, a)`: `a exp(-1 / (1 - ((x - c)/w)^2))` on `|x - c| < w`;
//! * `gaussian(c, w, a)`: `a exp(-((x - c)/w)^2)`;
//! * `mollified_peakon(c, mass, w)`: a bump of half-width `w` scaled so its
//!   grid sum times the spacing equals `mass`.
//!
//! When a profile describes a velocity, the momentum `(1 - d^2/dx^2) u` is
//! formed from the closed-form second derivative of each shape. A compact
//! velocity therefore yields a momentum with exactly the same support.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// One elementary shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Bump { center: f64, width: f64, amplitude: f64 },
    Gaussian { center: f64, width: f64, amplitude: f64 },
    MollifiedPeakon { center: f64, mass: f64, width: f64 },
}

/// Values below this fraction of a Gaussian's amplitude count as zero when
/// checking that it fits in the window.
const GAUSSIAN_EDGE_TOLERANCE: f64 = 1e-14;

fn bump_value_and_curvature(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let f = (-1.0 / q).exp();
    let gs = -2.0 * s / (q * q);
    let gss = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (f, f * (gs * gs + gss))
}

impl Shape {
    /// Declared support, `None` for shapes without compact support.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Shape::Bump { center, width, .. } | Shape::MollifiedPeakon { center, width, .. } => {
                Some((center - width, center + width))
            }
            Shape::Gaussian { .. } => None,
        }
    }

    fn validate(&self, grid: &Grid, key: &str) -> Result<()> {
        let l = grid.half_length();
        let (center, width) = match *self {
            Shape::Bump { center, width, .. }
            | Shape::Gaussian { center, width, .. }
            | Shape::MollifiedPeakon { center, width, .. } => (center, width),
        };
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(Error::config(key, format!("shape {self} needs a positive width")));
        }
        match *self {
            Shape::Bump { .. } | Shape::MollifiedPeakon { .. } => {
                if center - width < -l || center + width > l {
                    return Err(Error::config(
                        key,
                        format!("support of {self} crosses the window edge at +-{l}"),
                    ));
                }
            }
            Shape::Gaussian { .. } => {
                let reach = l - center.abs();
                if reach <= 0.0 || (-(reach / width).powi(2)).exp() > GAUSSIAN_EDGE_TOLERANCE {
                    return Err(Error::config(
                        key,
                        format!("{self} is not negligible at the window edge"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Samples of the shape and of its second derivative.
    fn sample(&self, grid: &Grid, key: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate(grid, key)?;
        let nodes = grid.nodes();
        let (mut f, mut fxx) = (Vec::with_capacity(nodes.len()), Vec::with_capacity(nodes.len()));
        match *self {
            Shape::Bump { center, width, amplitude } => {
                for &x in nodes {
                    let (v, c) = bump_value_and_curvature((x - center) / width);
                    f.push(amplitude * v);
                    fxx.push(amplitude * c / (width * width));
                }
            }
            Shape::Gaussian { center, width, amplitude } => {
                for &x in nodes {
                    let s = (x - center) / width;
                    let e = (-s * s).exp();
                    f.push(amplitude * e);
                    fxx.push(amplitude * e * (4.0 * s * s - 2.0) / (width * width));
                }
            }
            Shape::MollifiedPeakon { center, mass, width } => {
                let raw: Vec<(f64, f64)> = nodes
                    .iter()
                    .map(|&x| bump_value_and_curvature((x - center) / width))
                    .collect();
                let total: f64 = raw.iter().map(|r| r.0).sum::<f64>() * grid.spacing();
                if total <= 0.0 {
                    return Err(Error::config(
                        key,
                        format!("{self} is narrower than the grid spacing"),
                    ));
                }
                let scale = mass / total;
                for (v, c) in raw {
                    f.push(scale * v);
                    fxx.push(scale * c / (width * width));
                }
            }
        }
        Ok((f, fxx))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Bump { center, width, amplitude } => {
                write!(f, "bump({center}, {width}, {amplitude})")
            }
            Shape::Gaussian { center, width, amplitude } => {
                write!(f, "gaussian({center}, {width}, {amplitude})")
            }
            Shape::MollifiedPeakon { center, mass, width } => {
                write!(f, "mollified_peakon({center}, {mass}, {width})")
            }
        }
    }
}

/// A weighted shape inside a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub shape: Shape,
}

/// Signed sum of shapes. The empty profile is the zero field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    pub terms: Vec<Term>,
}

impl Profile {
    pub fn zero() -> Self {
        Profile::default()
    }

    pub fn single(shape: Shape) -> Self {
        Profile {
            terms: vec![Term { weight: 1.0, shape }],
        }
    }

    /// Smallest interval holding every term's support; `None` if a term has
    /// unbounded support or the profile is empty.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for term in &self.terms {
            if term.weight == 0.0 {
                continue;
            }
            let (a, b) = term.shape.support()?;
            out = Some(match out {
                None => (a, b),
                Some((lo, hi)) => (lo.min(a), hi.max(b)),
            });
        }
        out
    }

    /// Samples of the profile and of its second derivative.
    fn sample(&self, grid: &Grid, key: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = grid.n_points();
        let (mut f, mut fxx) = (vec![0.0; n], vec![0.0; n]);
        for term in &self.terms {
            let (a, b) = term.shape.sample(grid, key)?;
            for j in 0..n {
                f[j] += term.weight * a[j];
                fxx[j] += term.weight * b[j];
            }
        }
        Ok((f, fxx))
    }

    /// The profile as a field.
    pub fn field(&self, grid: &Grid, key: &str) -> Result<Field<f64>> {
        Field::from_samples(grid, self.sample(grid, key)?.0)
    }

    /// `(1 - d^2/dx^2)` of the profile, from closed-form derivatives.
    pub fn helmholtz_image(&self, grid: &Grid, key: &str) -> Result<Field<f64>> {
        let (f, fxx) = self.sample(grid, key)?;
        Field::from_samples(grid, f.iter().zip(&fxx).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let (sign, mag) = if term.weight.is_sign_negative() {
                ("-", -term.weight)
            } else {
                ("+", term.weight)
            };
            match (i, sign) {
                (0, "+") => {}
                (0, _) => write!(f, "-")?,
                _ => write!(f, " {sign} ")?,
            }
            if mag != 1.0 {
                write!(f, "{mag}*")?;
            }
            write!(f, "{}", term.shape)?;
        }
        Ok(())
    }
}

fn parse_term(text: &str, sign: f64) -> std::result::Result<Term, String> {
    let text = text.trim();
    let (weight, call) = match text.split_once('*') {
        Some((w, rest)) => (
            w.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad weight `{}`", w.trim()))?,
            rest.trim(),
        ),
        None => (1.0, text),
    };
    let open = call.find('(').ok_or_else(|| format!("expected a shape call, got `{call}`"))?;
    if !call.ends_with(')') {
        return Err(format!("unclosed shape call `{call}`"));
    }
    let name = call[..open].trim();
    let args: Vec<f64> = call[open + 1..call.len() - 1]
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", a.trim())))
        .collect::<std::result::Result<_, _>>()?;
    if args.len() != 3 {
        return Err(format!("{name} takes 3 arguments, got {}", args.len()));
    }
    let shape = match name {
        "bump" => Shape::Bump { center: args[0], width: args[1], amplitude: args[2] },
        "gaussian" => Shape::Gaussian { center: args[0], width: args[1], amplitude: args[2] },
        "mollified_peakon" => Shape::MollifiedPeakon { center: args[0], mass: args[1], width: args[2] },
        other => return Err(format!("unknown shape `{other}`")),
    };
    if !weight.is_finite() || args.iter().any(|a| !a.is_finite()) {
        return Err("shape parameters must be finite".into());
    }
    Ok(Term { weight: sign * weight, shape })
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if text.is_empty() {
            return Err("empty profile".into());
        }
        if text == "0" {
            return Ok(Profile::zero());
        }
        // Split on top-level '+' / '-' (outside parentheses and not part of
        // a number's exponent).
        let mut terms = Vec::new();
        let mut depth = 0_i32;
        let mut start = 0;
        let mut sign = 1.0;
        for (i, c) in text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 => {
                    let prev = text[..i].trim_end();
                    let is_exponent = prev.ends_with(['e', 'E'])
                        && prev[..prev.len() - 1].ends_with(|ch: char| ch.is_ascii_digit() || ch == '.');
                    if is_exponent {
                        continue;
                    }
                    let chunk = text[start..i].trim();
                    if chunk.is_empty() {
                        if i != 0 {
                            return Err(format!("dangling operator in `{text}`"));
                        }
                    } else {
                        terms.push(parse_term(chunk, sign)?);
                    }
                    sign = if c == '-' { -1.0 } else { 1.0 };
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(format!("unbalanced parentheses in `{text}`"));
        }
        let last = text[start..].trim();
        if last.is_empty() {
            return Err(format!("profile `{text}` ends with an operator"));
        }
        terms.push(parse_term(last, sign)?);
        Ok(Profile { terms })
    }
}

/// What a profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    /// Momenta `m, n` directly.
    #[default]
    Momentum,
    /// Velocities `u, v`; momenta are their Helmholtz images.
    Velocity,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Momentum => "momentum",
            Target::Velocity => "velocity",
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "momentum" => Ok(Target::Momentum),
            "velocity" => Ok(Target::Velocity),
            other => Err(format!("unknown target `{other}` (momentum|velocity)")),
        }
    }
}

/// Initial data: one profile per family, plus an imaginary part for the
/// complex reduction (whose second family is the conjugate of the first).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialSpec {
    pub target: Target,
    pub first: Profile,
    pub second: Profile,
    pub first_imag: Profile,
}

impl InitialSpec {
    fn momentum(&self, p: &Profile, grid: &Grid, key: &str) -> Result<Field<f64>> {
        match self.target {
            Target::Momentum => p.field(grid, key),
            Target::Velocity => p.helmholtz_image(grid, key),
        }
    }

    /// Declared supports of the two momenta.
    pub fn supports(&self) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        (self.first.support(), self.second.support())
    }
}

/// Real momenta `(m0, n0)`.
pub fn build_initial_condition(spec: &InitialSpec, grid: &Grid) -> Result<(Field<f64>, Field<f64>)> {
    let (k1, k2) = match spec.target {
        Target::Momentum => ("m0", "n0"),
        Target::Velocity => ("u0", "v0"),
    };
    Ok((
        spec.momentum(&spec.first, grid, k1)?,
        spec.momentum(&spec.second, grid, k2)?,
    ))
}

/// Complex momentum `m0` from real and imaginary profiles.
pub fn build_complex_initial_condition(spec: &InitialSpec, grid: &Grid) -> Result<Field<Complex64>> {
    let (k1, k2) = match spec.target {
        Target::Momentum => ("m0", "m0_imag"),
        Target::Velocity => ("u0", "u0_imag"),
    };
    let re = spec.momentum(&spec.first, grid, k1)?;
    let im = spec.momentum(&spec.first_imag, grid, k2)?;
    Field::from_parts(&re, &im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectral::helmholtz_forward;

    #[test]
    fn parse_and_display_round_trip() {
        for text in [
            "bump(-2, 3, 1)",
            "bump(-2, 3, 1) + bump(2, 3, 1)",
            "-gaussian(0, 1, 2.5) + 0.5*mollified_peakon(1, 10, 0.1)",
            "bump(1e-3, 3, 1) - 2*bump(-1, 1e0, 1)",
            "0",
        ] {
            let p: Profile = text.parse().unwrap();
            let again: Profile = p.to_string().parse().unwrap();
            assert_eq!(p, again, "{text}");
        }
        let p: Profile = "-bump(0,1,1) - bump(2,1,1)".parse().unwrap();
        assert!(p.terms.iter().all(|t| t.weight == -1.0));
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "bump(1,2)", "blob(1,2,3)", "bump(1,2,3", "bump(1,2,3) +", "bump(a,2,3)"] {
            assert!(bad.parse::<Profile>().is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_amplitude_bump_is_zero() {
        let g = make_grid(30.0, 256).unwrap();
        let p: Profile = "bump(0, 5, 0)".parse().unwrap();
        assert_eq!(p.field(&g, "m0").unwrap().max_abs(), 0.0);
    }

    #[test]
    fn bump_support_and_sign() {
        let g = make_grid(30.0, 2048).unwrap();
        let p: Profile = "bump(0, 5, 1)".parse().unwrap();
        let f = p.field(&g, "m0").unwrap();
        let min = f.samples().iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.0);
        for (j, &x) in g.nodes().iter().enumerate() {
            if x.abs() >= 5.0 {
                assert_eq!(f.samples()[j], 0.0);
            }
        }
        assert_eq!(p.support(), Some((-5.0, 5.0)));
    }

    #[test]
    fn edge_crossing_is_a_config_error() {
        let g = make_grid(10.0, 256).unwrap();
        let p: Profile = "bump(8, 3, 1)".parse().unwrap();
        assert!(matches!(p.field(&g, "m0"), Err(Error::Config { .. })));
        let q: Profile = "gaussian(8, 3, 1)".parse().unwrap();
        assert!(matches!(q.field(&g, "m0"), Err(Error::Config { .. })));
    }

    #[test]
    fn mollified_peakon_mass() {
        let g = make_grid(30.0, 2048).unwrap();
        let p: Profile = "mollified_peakon(0, 10, 0.1)".parse().unwrap();
        let f = p.field(&g, "m0").unwrap();
        assert!((f.integral() - 10.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_helmholtz_matches_spectral() {
        let g = make_grid(30.0, 2048).unwrap();
        let p: Profile = "bump(0, 5, 1) + gaussian(3, 2, 0.5)".parse().unwrap();
        let analytic = p.helmholtz_image(&g, "u0").unwrap();
        let spectral = helmholtz_forward(&p.field(&g, "u0").unwrap()).unwrap();
        assert!(analytic.max_abs_diff(&spectral) < 1e-7);
    }

    #[test]
    fn velocity_target_keeps_support() {
        let g = make_grid(30.0, 2048).unwrap();
        let spec = InitialSpec {
            target: Target::Velocity,
            first: "bump(-2, 5, 1)".parse().unwrap(),
            second: Profile::zero(),
            first_imag: Profile::zero(),
        };
        let (m, n) = build_initial_condition(&spec, &g).unwrap();
        assert_eq!(n.max_abs(), 0.0);
        for (j, &x) in g.nodes().iter().enumerate() {
            if !(-7.0..=3.0).contains(&x) {
                assert_eq!(m.samples()[j], 0.0);
            }
        }
    }
}
