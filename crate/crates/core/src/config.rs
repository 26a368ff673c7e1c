//! Plain-text scenario configuration.
//!
//! A document is a list of `key=value` pairs. Pairs may share a line when
//! separated by whitespace; `#` starts a comment. Every error names the
//! offending key and its line.
//!
//! ```text
//! kind = pde
//! m0 = bump(-2, 3, 1)
//! n0 = bump(2, 3, 1)
//! t_end = 10   output_every = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::diagnostics::{DEFAULT_EPSILON_REL, DEFAULT_TAIL_TOLERANCE};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::{InitialSpec, Profile, Target};
use crate::solver::{Dealiasing, Mode};

/// Which pipeline a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pde,
    Peakon,
    Complex,
    Characteristics,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Pde => "pde",
            Kind::Peakon => "peakon",
            Kind::Complex => "complex",
            Kind::Characteristics => "characteristics",
        }
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pde" => Ok(Kind::Pde),
            "peakon" => Ok(Kind::Peakon),
            "complex" => Ok(Kind::Complex),
            "characteristics" => Ok(Kind::Characteristics),
            other => Err(format!(
                "unknown kind `{other}` (pde|peakon|complex|characteristics)"
            )),
        }
    }
}

/// Peakon positions and amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakonSpec {
    pub m_amps: Vec<f64>,
    pub q: Vec<f64>,
    pub n_amps: Vec<f64>,
    pub r: Vec<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub half_length: f64,
    pub n_points: usize,
    pub t_end: f64,
    pub dt: f64,
    pub output_every: f64,
    pub mode: Mode,
    pub dealias: Dealiasing,
    pub ic: InitialSpec,
    pub peakons: PeakonSpec,
    /// Support threshold relative to the initial maximum of each field.
    pub epsilon_support: f64,
    pub tail_tolerance: f64,
    pub blowup_threshold: Option<f64>,
    /// Label stride for characteristics.
    pub label_stride: usize,
    /// Diagnostics CSV path.
    pub output: Option<String>,
    /// Field snapshot CSV path.
    pub snapshots: Option<String>,
}

impl ScenarioConfig {
    /// Defaults for a kind, without initial data.
    pub fn defaults(kind: Kind) -> Self {
        ScenarioConfig {
            kind,
            half_length: 30.0,
            n_points: 2048,
            t_end: 1.0,
            dt: 1e-3,
            output_every: 0.1,
            mode: if kind == Kind::Complex {
                Mode::ComplexConjugate
            } else {
                Mode::Coupled
            },
            dealias: Dealiasing::Off,
            ic: InitialSpec::default(),
            peakons: PeakonSpec::default(),
            epsilon_support: DEFAULT_EPSILON_REL,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            blowup_threshold: None,
            label_stride: crate::characteristics::DEFAULT_LABEL_STRIDE,
            output: None,
            snapshots: None,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_length, self.n_points).map_err(|e| match e {
            Error::Config { key, message, .. } => Error::config(key, message),
            other => Error::config("n_points", other.to_string()),
        })
    }

    /// Output times `k * output_every` inside `(0, t_end]`.
    pub fn output_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 1_u64;
        loop {
            let t = k as f64 * self.output_every;
            if t > self.t_end * (1.0 + 1e-12) + 1e-12 {
                break;
            }
            out.push(t.min(self.t_end));
            k += 1;
        }
        out
    }

    /// Writes the config in a form [`parse_config`] reads back identically.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("kind", self.kind.as_str().into());
        put("half_length", self.half_length.to_string());
        put("n_points", self.n_points.to_string());
        put("t_end", self.t_end.to_string());
        put("dt", self.dt.to_string());
        put("output_every", self.output_every.to_string());
        if self.kind == Kind::Peakon {
            let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
            put("m_amps", list(&self.peakons.m_amps));
            put("q", list(&self.peakons.q));
            put("n_amps", list(&self.peakons.n_amps));
            put("r", list(&self.peakons.r));
        } else {
            put("mode", self.mode.as_str().into());
            put("dealias", self.dealias.as_str().into());
            let (first, second, imag) = match self.ic.target {
                Target::Momentum => ("m0", "n0", "m0_imag"),
                Target::Velocity => ("u0", "v0", "u0_imag"),
            };
            put(first, self.ic.first.to_string());
            match self.kind {
                Kind::Complex => put(imag, self.ic.first_imag.to_string()),
                _ if self.mode == Mode::ChReduction => {}
                _ => put(second, self.ic.second.to_string()),
            }
            put("epsilon_support", self.epsilon_support.to_string());
            put("tail_tolerance", self.tail_tolerance.to_string());
            if let Some(b) = self.blowup_threshold {
                put("blowup_threshold", b.to_string());
            }
            if self.kind == Kind::Characteristics {
                put("label_stride", self.label_stride.to_string());
            }
        }
        if let Some(o) = &self.output {
            put("output", o.clone());
        }
        if let Some(o) = &self.snapshots {
            put("snapshots", o.clone());
        }
        s
    }

    /// Re-parses the config with one key replaced.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut text = String::new();
        let mut replaced = false;
        for line in self.serialize().lines() {
            let k = line.split('=').next().unwrap_or("").trim();
            if k == key {
                let _ = writeln!(text, "{key} = {value}");
                replaced = true;
            } else {
                let _ = writeln!(text, "{line}");
            }
        }
        if !replaced {
            let _ = writeln!(text, "{key} = {value}");
        }
        parse_config(&text)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "half_length",
    "n_points",
    "t_end",
    "dt",
    "output_every",
    "mode",
    "dealias",
    "m0",
    "n0",
    "m0_imag",
    "u0",
    "v0",
    "u0_imag",
    "m_amps",
    "q",
    "n_amps",
    "r",
    "epsilon_support",
    "tail_tolerance",
    "blowup_threshold",
    "label_stride",
    "output",
    "snapshots",
];

fn is_key(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Splits one line into `(key, value)` pairs. A whitespace-separated token
/// of the form `key=...` starts a new pair; other tokens extend the value
/// of the current pair.
fn split_pairs(line: &str, lineno: usize) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    // Normalise `key = value` to `key=value` so tokens carry their key.
    let mut tokens: Vec<String> = Vec::new();
    for tok in line.split_whitespace() {
        let joins = tokens.last().is_some_and(|t| {
            (tok.starts_with('=') && is_key(t)) || (t.ends_with('=') && is_key(&t[..t.len() - 1]))
        });
        if joins {
            let key = tokens.pop().expect("checked");
            tokens.push(format!("{key}{tok}"));
        } else {
            tokens.push(tok.to_string());
        }
    }
    for tok in tokens {
        match tok.split_once('=') {
            Some((k, v)) if is_key(k) => pairs.push((k.to_string(), v.to_string())),
            _ => match pairs.last_mut() {
                Some((_, v)) => {
                    v.push(' ');
                    v.push_str(&tok);
                }
                None => {
                    return Err(Error::Config {
                        key: tok.clone(),
                        line: lineno,
                        message: "expected key=value".into(),
                    })
                }
            },
        }
    }
    Ok(pairs)
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.map.get(key).map_or(0, |e| e.1);
        Error::Config {
            key: key.into(),
            line,
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.0.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.err(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get::<f64>(key)?.unwrap_or(default);
        if !(v.is_finite() && v > 0.0) {
            return Err(self.err(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self
            .raw(key)
            .ok_or_else(|| self.err(key, "required for kind=peakon"))?;
        raw.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(key, format!("`{s}` is not a finite number")))
            })
            .collect()
    }

    fn profile(&self, key: &str) -> Result<Option<Profile>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<Profile>().map(Some).map_err(|e| self.err(key, e)),
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = line.split('#').next().unwrap_or("");
        for (k, v) in split_pairs(content, lineno)? {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Config {
                    key: k,
                    line: lineno,
                    message: "unknown key".into(),
                });
            }
            if v.trim().is_empty() {
                return Err(Error::Config {
                    key: k,
                    line: lineno,
                    message: "missing value".into(),
                });
            }
            if let Some((_, first)) = map.get(&k) {
                return Err(Error::Config {
                    message: format!("duplicate key (first set on line {first})"),
                    key: k,
                    line: lineno,
                });
            }
            map.insert(k, (v.trim().to_string(), lineno));
        }
    }
    let e = Entries { map };
    let kind: Kind = e
        .get("kind")?
        .ok_or_else(|| e.err("kind", "required (pde|peakon|complex|characteristics)"))?;
    let mut cfg = ScenarioConfig::defaults(kind);
    cfg.half_length = e.positive("half_length", cfg.half_length)?;
    if let Some(n) = e.get::<usize>("n_points")? {
        cfg.n_points = n;
    }
    cfg.grid().map_err(|err| match err {
        Error::Config { key, message, .. } => e.err(&key, message),
        other => e.err("n_points", other.to_string()),
    })?;
    cfg.t_end = e.get::<f64>("t_end")?.unwrap_or(cfg.t_end);
    if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        return Err(e.err("t_end", "must be finite and nonnegative"));
    }
    cfg.dt = e.positive("dt", cfg.dt)?;
    cfg.output_every = e.positive("output_every", cfg.output_every)?;
    cfg.output = e.raw("output").map(str::to_string);
    cfg.snapshots = e.raw("snapshots").map(str::to_string);

    let ic_keys = ["mode", "dealias", "m0", "n0", "m0_imag", "u0", "v0", "u0_imag"];
    let extra_keys = ["epsilon_support", "tail_tolerance", "blowup_threshold", "label_stride"];
    let peakon_keys = ["m_amps", "q", "n_amps", "r"];

    if kind == Kind::Peakon {
        if let Some(k) = ic_keys.iter().chain(&extra_keys).find(|k| e.raw(k).is_some()) {
            return Err(e.err(k, "not used by kind=peakon"));
        }
        let p = PeakonSpec {
            m_amps: e.list("m_amps")?,
            q: e.list("q")?,
            n_amps: e.list("n_amps")?,
            r: e.list("r")?,
        };
        if p.m_amps.len() != p.q.len() {
            return Err(e.err("q", "needs one position per m amplitude"));
        }
        if p.n_amps.len() != p.r.len() {
            return Err(e.err("r", "needs one position per n amplitude"));
        }
        cfg.peakons = p;
        return Ok(cfg);
    }
    if let Some(k) = peakon_keys.iter().find(|k| e.raw(k).is_some()) {
        return Err(e.err(k, format!("not used by kind={}", kind.as_str())));
    }
    if let Some(mode) = e.raw("mode") {
        cfg.mode = mode.parse().map_err(|_| e.err("mode", format!("unknown mode `{mode}`")))?;
    }
    match (kind, cfg.mode) {
        (Kind::Complex, Mode::ComplexConjugate) => {}
        (Kind::Complex, _) => return Err(e.err("mode", "kind=complex implies complex_conjugate")),
        (_, Mode::ComplexConjugate) => {
            return Err(e.err("mode", "complex_conjugate needs kind=complex"))
        }
        _ => {}
    }
    if let Some(d) = e.raw("dealias") {
        cfg.dealias = d.parse().map_err(|_| e.err("dealias", format!("unknown value `{d}`")))?;
    }

    let momentum_given = ["m0", "n0", "m0_imag"].iter().any(|k| e.raw(k).is_some());
    let velocity_given = ["u0", "v0", "u0_imag"].iter().any(|k| e.raw(k).is_some());
    let (target, first, second, imag) = match (momentum_given, velocity_given) {
        (true, true) => return Err(e.err("u0", "give momenta (m0, ...) or velocities (u0, ...), not both")),
        (false, true) => (Target::Velocity, "u0", "v0", "u0_imag"),
        _ => (Target::Momentum, "m0", "n0", "m0_imag"),
    };
    let first_profile = e
        .profile(first)?
        .ok_or_else(|| e.err(first, "initial condition required"))?;
    let second_profile = e.profile(second)?;
    let imag_profile = e.profile(imag)?;
    let mut ic = InitialSpec {
        target,
        first: first_profile,
        ..InitialSpec::default()
    };
    match kind {
        Kind::Complex => {
            if second_profile.is_some() {
                return Err(e.err(second, "kind=complex sets the second family to the conjugate"));
            }
            ic.first_imag = imag_profile.unwrap_or_default();
        }
        _ => {
            if imag_profile.is_some() {
                return Err(e.err(imag, "only used by kind=complex"));
            }
            if cfg.mode == Mode::ChReduction {
                if second_profile.is_some() {
                    return Err(e.err(second, "ch_reduction copies the first family"));
                }
                ic.second = ic.first.clone();
            } else {
                ic.second = second_profile.unwrap_or_default();
            }
        }
    }
    cfg.ic = ic;
    cfg.epsilon_support = e.positive("epsilon_support", cfg.epsilon_support)?;
    cfg.tail_tolerance = e.positive("tail_tolerance", cfg.tail_tolerance)?;
    if e.raw("blowup_threshold").is_some() {
        cfg.blowup_threshold = Some(e.positive("blowup_threshold", 0.0)?);
    }
    if let Some(s) = e.get::<usize>("label_stride")? {
        if kind != Kind::Characteristics {
            return Err(e.err("label_stride", "only used by kind=characteristics"));
        }
        if s == 0 {
            return Err(e.err("label_stride", "must be at least 1"));
        }
        cfg.label_stride = s;
    }
    Ok(cfg)
}
