//! Line-oriented `key = value` configuration of a simulation.
//!
//! ```text
//! # 2D Fermi gas relaxing from a ball
//! dim = 2
//! n = 64
//! L = 8
//! kernel = maxwell2d
//! stats = fermi_r(0.5)
//! ic = ball_indicator(rho = 1, u = [0, 0], e = 1)
//! t_final = 30
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key may appear once;
//! unknown keys are rejected. Defaults are listed on [`SimConfig::default`].

use std::collections::HashMap;
use std::fmt;

use bne_core::dynamics::Integrator;
use bne_core::equilibrium::InitialProfile;
use bne_core::error::KernelError;
use bne_core::grid::{build_grid, GridSpec};
use bne_core::kernel::{build_hardsphere3d, build_maxwell2d, build_vhs_quadrature, AngularNodes, KernelTable};
use bne_core::stats::{hbar_star, ParticleStatistics, StatsKind};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Maxwell2d,
    Hardsphere3d,
    /// Decoupled VHS kernel `a(|z|) = 2^{d-1} C_Φ |z|^{γ-d+2}`, `b ≡ 1`.
    Vhs { gamma: f64, c_phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsSpec {
    Classical,
    Fermi { hbar: f64 },
    Bose { hbar: f64 },
    /// `ħ = r ħ*` with the threshold of the initial moments.
    FermiR { r: f64 },
    BoseR { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IcSpec {
    QuantumMaxwellian { rho: f64, u: [f64; 3], sigma: f64 },
    ClassicalMaxwellian { rho: f64, u: [f64; 3], sigma: f64 },
    BallIndicator { rho: f64, u: [f64; 3], e: f64 },
}

impl IcSpec {
    pub fn profile(&self) -> InitialProfile {
        match *self {
            IcSpec::QuantumMaxwellian { rho, u, sigma } => InitialProfile::QuantumMaxwellian { rho, u, sigma },
            IcSpec::ClassicalMaxwellian { rho, u, sigma } => InitialProfile::ClassicalMaxwellian { rho, u, sigma },
            IcSpec::BallIndicator { rho, u, e } => InitialProfile::BallIndicator { rho, u, e },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorSpec {
    Euler,
    Rk2ssp,
}

impl From<IntegratorSpec> for Integrator {
    fn from(i: IntegratorSpec) -> Self {
        match i {
            IntegratorSpec::Euler => Integrator::Euler,
            IntegratorSpec::Rk2ssp => Integrator::Rk2Ssp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub trunc_ratio: f64,
    pub kernel: KernelSpec,
    /// `C_Φ` of the closed-form kernels.
    pub c_phi: f64,
    /// Angular nodes: `m` in 2D, `(m1, m2)` in 3D.
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub quad_order: usize,
    pub stats: StatsSpec,
    pub rescaling: bool,
    pub integrator: IntegratorSpec,
    pub dt: f64,
    pub t_final: f64,
    /// Collision scaling `c`.
    pub c: f64,
    pub ic: IcSpec,
    pub record_every: usize,
    pub snapshot_times: Vec<f64>,
    pub deterministic: bool,
    /// Worker threads; 0 leaves the choice to rayon.
    pub threads: usize,
    pub blowup_bound: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dim: 2,
            n: 32,
            l: 8.0,
            trunc_ratio: 1.0,
            kernel: KernelSpec::Maxwell2d,
            c_phi: 1.0,
            m: 8,
            m1: 4,
            m2: 4,
            quad_order: 64,
            stats: StatsSpec::Classical,
            rescaling: false,
            integrator: IntegratorSpec::Rk2ssp,
            dt: 0.025,
            t_final: 1.0,
            c: 1.0,
            ic: IcSpec::ClassicalMaxwellian { rho: 1.0, u: [0.0; 3], sigma: 1.0 },
            record_every: 1,
            snapshot_times: Vec::new(),
            deterministic: true,
            threads: 0,
            blowup_bound: bne_core::collision::DEFAULT_BLOWUP_BOUND,
        }
    }
}

/// A configuration with the grid built and `ħ` resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: SimConfig,
    pub grid: GridSpec,
    pub stats: ParticleStatistics,
    /// Threshold `ħ*` of the initial moments, for quantum statistics.
    pub hbar_star: Option<f64>,
}

impl SimConfig {
    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Canonical text form; parses back to the same configuration.
    pub fn to_text(&self) -> String {
        let vec = |u: &[f64; 3]| {
            let parts: Vec<String> = u[..self.dim].iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", parts.join(", "))
        };
        let kernel = match self.kernel {
            KernelSpec::Maxwell2d => "maxwell2d".to_string(),
            KernelSpec::Hardsphere3d => "hardsphere3d".to_string(),
            KernelSpec::Vhs { gamma, c_phi } => format!("vhs({gamma:?}, {c_phi:?})"),
        };
        let stats = match self.stats {
            StatsSpec::Classical => "classical".to_string(),
            StatsSpec::Fermi { hbar } => format!("fermi({hbar:?})"),
            StatsSpec::Bose { hbar } => format!("bose({hbar:?})"),
            StatsSpec::FermiR { r } => format!("fermi_r({r:?})"),
            StatsSpec::BoseR { r } => format!("bose_r({r:?})"),
        };
        let ic = match &self.ic {
            IcSpec::QuantumMaxwellian { rho, u, sigma } => {
                format!("quantum_maxwellian(rho = {rho:?}, u = {}, sigma = {sigma:?})", vec(u))
            }
            IcSpec::ClassicalMaxwellian { rho, u, sigma } => {
                format!("classical_maxwellian(rho = {rho:?}, u = {}, sigma = {sigma:?})", vec(u))
            }
            IcSpec::BallIndicator { rho, u, e } => format!("ball_indicator(rho = {rho:?}, u = {}, e = {e:?})", vec(u)),
        };
        let mut out = format!(
            "dim = {}\nn = {}\nL = {:?}\ntrunc_ratio = {:?}\nkernel = {kernel}\n",
            self.dim, self.n, self.l, self.trunc_ratio
        );
        if !matches!(self.kernel, KernelSpec::Vhs { .. }) {
            out += &format!("c_phi = {:?}\n", self.c_phi);
        }
        out += &format!(
            "m = {}\nm1 = {}\nm2 = {}\nquad_order = {}\nstats = {stats}\nrescaling = {}\nintegrator = {}\n",
            self.m,
            self.m1,
            self.m2,
            self.quad_order,
            self.rescaling,
            match self.integrator {
                IntegratorSpec::Euler => "euler",
                IntegratorSpec::Rk2ssp => "rk2ssp",
            }
        );
        out += &format!(
            "dt = {:?}\nt_final = {:?}\nc = {:?}\nic = {ic}\nrecord_every = {}\n",
            self.dt, self.t_final, self.c, self.record_every
        );
        if !self.snapshot_times.is_empty() {
            let t: Vec<String> = self.snapshot_times.iter().map(|x| format!("{x:?}")).collect();
            out += &format!("snapshot_times = {}\n", t.join(", "));
        }
        out += &format!(
            "deterministic = {}\nthreads = {}\nblowup_bound = {:?}\n",
            self.deterministic, self.threads, self.blowup_bound
        );
        out
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let at0 = |msg: String| ConfigError { line: 0, col: 0, msg };
        let grid = build_grid(self.dim, self.n, self.l, self.trunc_ratio).map_err(|e| at0(e.to_string()))?;
        let (stats, hbar_star) = resolve_stats(self).map_err(at0)?;
        Ok(Resolved { config: self.clone(), grid, stats, hbar_star })
    }

    /// Angular node counts for this dimension.
    pub fn angular_nodes(&self) -> AngularNodes {
        if self.dim == 2 {
            AngularNodes::Plane(self.m)
        } else {
            AngularNodes::Sphere(self.m1, self.m2)
        }
    }

    pub fn build_table(&self, grid: &GridSpec) -> Result<KernelTable, KernelError> {
        match self.kernel {
            KernelSpec::Maxwell2d => build_maxwell2d(grid, self.m, self.c_phi),
            KernelSpec::Hardsphere3d => build_hardsphere3d(grid, self.m1, self.m2, self.c_phi),
            KernelSpec::Vhs { gamma, c_phi } => {
                let d = self.dim as f64;
                let pre = 2f64.powf(d - 1.0) * c_phi;
                let expo = gamma - d + 2.0;
                let a = move |r: f64| if expo == 0.0 { pre } else { pre * r.abs().powf(expo) };
                let b = |_: f64| 1.0;
                let label = format!("vhs{gamma}-{c_phi}");
                let mut t = build_vhs_quadrature(grid, &a, &b, self.quad_order, self.angular_nodes(), &label)?;
                t.gamma = gamma;
                t.c_phi = c_phi;
                Ok(t)
            }
        }
    }
}

fn resolve_stats(c: &SimConfig) -> Result<(ParticleStatistics, Option<f64>), String> {
    let d = c.dim;
    let star = |kind: StatsKind| -> Result<f64, String> {
        let m = c
            .ic
            .profile()
            .moments(d, &ParticleStatistics::classical(d))
            .map_err(|e| e.to_string())?;
        hbar_star(kind, d, m.rho, m.e).ok_or_else(|| format!("no threshold ħ* for {kind:?} in {d}D"))
    };
    Ok(match c.stats {
        StatsSpec::Classical => (ParticleStatistics::classical(d), None),
        StatsSpec::Fermi { hbar } => {
            let s = ParticleStatistics::fermi(d, hbar);
            (s, star_for(c, &s))
        }
        StatsSpec::Bose { hbar } => {
            let s = ParticleStatistics::bose(d, hbar);
            (s, star_for(c, &s))
        }
        StatsSpec::FermiR { r } => {
            let hs = star(StatsKind::FermiDirac)?;
            (ParticleStatistics::fermi(d, r * hs), Some(hs))
        }
        StatsSpec::BoseR { r } => {
            let hs = star(StatsKind::BoseEinstein)?;
            (ParticleStatistics::bose(d, r * hs), Some(hs))
        }
    })
}

/// Threshold from the initial moments computed with the run's statistics
/// (a quantum Maxwellian's energy depends on `ħ`).
fn star_for(c: &SimConfig, s: &ParticleStatistics) -> Option<f64> {
    let m = c.ic.profile().moments(c.dim, s).ok()?;
    hbar_star(s.kind, c.dim, m.rho, m.e)
}

// ---------------------------------------------------------------------------
// Parsing

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    /// Column of `src[0]` in the line, 1-based.
    base_col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Atom {
    Num(f64),
    Vec(Vec<f64>),
    Ident(String),
}

#[derive(Debug, Clone)]
struct Arg {
    name: Option<String>,
    value: Atom,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>) -> ConfigError {
        ConfigError { line: self.line, col: self.base_col + self.pos, msg: msg.into() }
    }

    fn col(&self) -> usize {
        self.base_col + self.pos
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn ident(&mut self) -> Result<String, ConfigError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.err("expected a name"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64, ConfigError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'e' | b'E' | b'+' | b'-') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.err(format!("invalid number '{text}'")))
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, ConfigError> {
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let mut v = Vec::new();
                if self.peek() == Some(b']') {
                    self.pos += 1;
                    return Ok(Atom::Vec(v));
                }
                loop {
                    v.push(self.number()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            return Ok(Atom::Vec(v));
                        }
                        _ => return Err(self.err("expected ',' or ']'")),
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => Ok(Atom::Ident(self.ident()?)),
            Some(_) => Ok(Atom::Num(self.number()?)),
            None => Err(self.err("missing value")),
        }
    }

    /// `name` or `name(arg, ...)` where each arg is `atom` or `key = atom`.
    fn call(&mut self) -> Result<(String, Vec<Arg>), ConfigError> {
        let name = self.ident()?;
        let mut args = Vec::new();
        if self.peek() != Some(b'(') {
            return Ok((name, args));
        }
        self.pos += 1;
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok((name, args));
        }
        loop {
            self.skip_ws();
            let col = self.col();
            let save = self.pos;
            let mut arg_name = None;
            if let Ok(id) = self.ident() {
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    arg_name = Some(id);
                } else {
                    self.pos = save;
                }
            }
            let value = self.atom()?;
            args.push(Arg { name: arg_name, value, col });
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok((name, args));
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
    }
}

/// Named or positional arguments of a call, consumed in a fixed order.
struct ArgSet {
    args: Vec<Arg>,
    line: usize,
    col: usize,
    call: String,
}

impl ArgSet {
    /// The argument called `name`, else the first unnamed one. Callers take
    /// arguments in declaration order, so positional ones line up.
    fn take(&mut self, name: &str) -> Option<Arg> {
        let i = self
            .args
            .iter()
            .position(|a| a.name.as_deref() == Some(name))
            .or_else(|| self.args.iter().position(|a| a.name.is_none()))?;
        Some(self.args.remove(i))
    }

    fn num(&mut self, name: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.take(name) {
            Some(Arg { value: Atom::Num(v), .. }) => Ok(v),
            Some(a) => Err(ConfigError { line: self.line, col: a.col, msg: format!("{name} must be a number") }),
            None => default.ok_or_else(|| ConfigError {
                line: self.line,
                col: self.col,
                msg: format!("{} needs argument '{name}'", self.call),
            }),
        }
    }

    fn vec(&mut self, name: &str, dim: usize) -> Result<[f64; 3], ConfigError> {
        match self.take(name) {
            Some(Arg { value: Atom::Vec(v), col, .. }) => {
                if v.len() != dim {
                    return Err(ConfigError {
                        line: self.line,
                        col,
                        msg: format!("{name} has {} components, expected {dim}", v.len()),
                    });
                }
                let mut u = [0.0; 3];
                u[..dim].copy_from_slice(&v);
                Ok(u)
            }
            Some(Arg { value: Atom::Num(x), .. }) if x == 0.0 => Ok([0.0; 3]),
            Some(a) => Err(ConfigError { line: self.line, col: a.col, msg: format!("{name} must be a vector [..]") }),
            None => Ok([0.0; 3]),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.args.first() {
            None => Ok(()),
            Some(a) => Err(ConfigError {
                line: self.line,
                col: a.col,
                msg: match &a.name {
                    Some(n) => format!("{} has no argument '{n}'", self.call),
                    None => format!("too many arguments for {}", self.call),
                },
            }),
        }
    }
}

const KEYS: &[&str] = &[
    "dim",
    "n",
    "L",
    "trunc_ratio",
    "kernel",
    "c_phi",
    "m",
    "m1",
    "m2",
    "quad_order",
    "stats",
    "rescaling",
    "integrator",
    "dt",
    "t_final",
    "c",
    "ic",
    "record_every",
    "snapshot_times",
    "deterministic",
    "threads",
    "blowup_bound",
];

struct Entry<'a> {
    line: usize,
    key_col: usize,
    value_col: usize,
    value: &'a str,
}

pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(ConfigError { line, col, msg: "expected 'key = value'".into() });
        };
        let key_part = &content[..eq];
        let key = key_part.trim();
        let key_col = key_part.len() - key_part.trim_start().len() + 1;
        if key.is_empty() {
            return Err(ConfigError { line, col: key_col, msg: "missing key".into() });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError { line, col: key_col, msg: format!("unknown key '{key}'") });
        }
        let value_part = &content[eq + 1..];
        let value = value_part.trim();
        let value_col = eq + 2 + (value_part.len() - value_part.trim_start().len());
        if value.is_empty() {
            return Err(ConfigError { line, col: value_col, msg: format!("missing value for '{key}'") });
        }
        if let Some(prev) = entries.get(key) {
            return Err(ConfigError {
                line,
                col: key_col,
                msg: format!("duplicate key '{key}' (first set on line {})", prev.line),
            });
        }
        entries.insert(key, Entry { line, key_col, value_col, value });
    }

    let mut c = SimConfig::default();
    fn lexer<'a>(e: &Entry<'a>) -> Lexer<'a> {
        Lexer { src: e.value.as_bytes(), pos: 0, line: e.line, base_col: e.value_col }
    }
    let at = |e: &Entry, msg: String| ConfigError { line: e.line, col: e.value_col, msg };

    let int = |key: &str| -> Result<Option<usize>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<usize>().map(Some).map_err(|_| at(e, format!("{key} must be a non-negative integer"))),
        }
    };
    let real = |key: &str| -> Result<Option<f64>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => {
                let mut lx = lexer(e);
                let v = lx.number()?;
                if !lx.at_end() {
                    return Err(lx.err("unexpected trailing input"));
                }
                Ok(Some(v))
            }
        }
    };
    let boolean = |key: &str| -> Result<Option<bool>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => match e.value {
                "true" | "on" | "yes" => Ok(Some(true)),
                "false" | "off" | "no" => Ok(Some(false)),
                _ => Err(at(e, format!("{key} must be true or false"))),
            },
        }
    };

    if let Some(v) = int("dim")? {
        c.dim = v;
    }
    let dim_entry = entries.get("dim");
    if c.dim != 2 && c.dim != 3 {
        let e = dim_entry.expect("non-default dim was set");
        return Err(at(e, format!("dim must be 2 or 3, got {}", c.dim)));
    }
    c.kernel = if c.dim == 2 { KernelSpec::Maxwell2d } else { KernelSpec::Hardsphere3d };
    if let Some(v) = int("n")? {
        c.n = v;
    }
    if c.n < 4 || c.n % 2 == 1 {
        if let Some(e) = entries.get("n") {
            return Err(at(e, format!("n must be even and at least 4, got {}", c.n)));
        }
    }
    if let Some(v) = real("L")? {
        if v <= 0.0 {
            return Err(at(&entries["L"], "L must be positive".into()));
        }
        c.l = v;
    }
    if let Some(v) = real("trunc_ratio")? {
        if v < 1.0 {
            return Err(at(&entries["trunc_ratio"], "trunc_ratio must be at least 1".into()));
        }
        c.trunc_ratio = v;
    }
    if let Some(v) = real("c_phi")? {
        if v <= 0.0 {
            return Err(at(&entries["c_phi"], "c_phi must be positive".into()));
        }
        c.c_phi = v;
    }
    for (key, slot) in [("m", &mut c.m), ("m1", &mut c.m1), ("m2", &mut c.m2)] {
        if let Some(v) = int(key)? {
            if v == 0 {
                return Err(at(&entries[key], format!("{key} must be positive")));
            }
            *slot = v;
        }
    }
    if let Some(v) = int("quad_order")? {
        if v < 8 {
            return Err(at(&entries["quad_order"], "quad_order must be at least 8".into()));
        }
        c.quad_order = v;
    }
    if let Some(e) = entries.get("kernel") {
        let mut lx = lexer(e);
        let (name, args) = lx.call()?;
        if !lx.at_end() {
            return Err(lx.err("unexpected trailing input"));
        }
        let mut set = ArgSet { args, line: e.line, col: e.value_col, call: name.clone() };
        c.kernel = match name.as_str() {
            "maxwell2d" => KernelSpec::Maxwell2d,
            "hardsphere3d" => KernelSpec::Hardsphere3d,
            "vhs" => {
                let gamma = set.num("gamma", None)?;
                let c_phi = set.num("c_phi", Some(1.0))?;
                if !(0.0..=1.0).contains(&gamma) {
                    return Err(at(e, format!("vhs gamma must lie in [0, 1], got {gamma}")));
                }
                if c_phi <= 0.0 {
                    return Err(at(e, "vhs c_phi must be positive".into()));
                }
                KernelSpec::Vhs { gamma, c_phi }
            }
            other => return Err(at(e, format!("unknown kernel '{other}' (maxwell2d, hardsphere3d, vhs)"))),
        };
        set.finish()?;
        let needs = match c.kernel {
            KernelSpec::Maxwell2d => Some(2),
            KernelSpec::Hardsphere3d => Some(3),
            KernelSpec::Vhs { .. } => None,
        };
        if let Some(d) = needs {
            if d != c.dim {
                return Err(at(e, format!("kernel {name} needs dim = {d}, but dim = {}", c.dim)));
            }
        }
        if let (KernelSpec::Vhs { .. }, Some(cp)) = (c.kernel, entries.get("c_phi")) {
            return Err(ConfigError {
                line: cp.line,
                col: cp.key_col,
                msg: "c_phi is given inside vhs(...); remove the separate key".into(),
            });
        }
    }
    if let Some(e) = entries.get("stats") {
        let mut lx = lexer(e);
        let (name, args) = lx.call()?;
        if !lx.at_end() {
            return Err(lx.err("unexpected trailing input"));
        }
        let mut set = ArgSet { args, line: e.line, col: e.value_col, call: name.clone() };
        c.stats = match name.as_str() {
            "classical" => StatsSpec::Classical,
            "fermi" => StatsSpec::Fermi { hbar: set.num("hbar", None)? },
            "bose" => StatsSpec::Bose { hbar: set.num("hbar", None)? },
            "fermi_r" => StatsSpec::FermiR { r: set.num("r", None)? },
            "bose_r" => StatsSpec::BoseR { r: set.num("r", None)? },
            other => {
                return Err(at(e, format!("unknown statistics '{other}' (classical, fermi, bose, fermi_r, bose_r)")))
            }
        };
        set.finish()?;
        let v = match c.stats {
            StatsSpec::Classical => 1.0,
            StatsSpec::Fermi { hbar } | StatsSpec::Bose { hbar } => hbar,
            StatsSpec::FermiR { r } | StatsSpec::BoseR { r } => r,
        };
        if v <= 0.0 {
            return Err(at(e, format!("{name} parameter must be positive")));
        }
    }
    if let Some(v) = boolean("rescaling")? {
        c.rescaling = v;
    }
    if let Some(e) = entries.get("integrator") {
        c.integrator = match e.value {
            "euler" => IntegratorSpec::Euler,
            "rk2ssp" | "rk2" => IntegratorSpec::Rk2ssp,
            other => return Err(at(e, format!("unknown integrator '{other}' (euler, rk2ssp)"))),
        };
    }
    if let Some(v) = real("dt")? {
        if v <= 0.0 {
            return Err(at(&entries["dt"], "dt must be positive".into()));
        }
        c.dt = v;
    }
    if let Some(v) = real("t_final")? {
        if v < 0.0 {
            return Err(at(&entries["t_final"], "t_final must be non-negative".into()));
        }
        c.t_final = v;
    }
    if let Some(v) = real("c")? {
        if v < 0.0 {
            return Err(at(&entries["c"], "c must be non-negative".into()));
        }
        c.c = v;
    }
    if let Some(e) = entries.get("ic") {
        let mut lx = lexer(e);
        let (name, args) = lx.call()?;
        if !lx.at_end() {
            return Err(lx.err("unexpected trailing input"));
        }
        let mut set = ArgSet { args, line: e.line, col: e.value_col, call: name.clone() };
        c.ic = match name.as_str() {
            "quantum_maxwellian" | "classical_maxwellian" => {
                let rho = set.num("rho", None)?;
                let u = set.vec("u", c.dim)?;
                let sigma = set.num("sigma", None)?;
                if rho <= 0.0 || sigma <= 0.0 {
                    return Err(at(e, "rho and sigma must be positive".into()));
                }
                if name == "quantum_maxwellian" {
                    IcSpec::QuantumMaxwellian { rho, u, sigma }
                } else {
                    IcSpec::ClassicalMaxwellian { rho, u, sigma }
                }
            }
            "ball_indicator" => {
                let rho = set.num("rho", None)?;
                let u = set.vec("u", c.dim)?;
                let en = set.num("e", None)?;
                if rho <= 0.0 || en <= 0.0 {
                    return Err(at(e, "rho and e must be positive".into()));
                }
                IcSpec::BallIndicator { rho, u, e: en }
            }
            other => {
                return Err(at(
                    e,
                    format!("unknown initial profile '{other}' (quantum_maxwellian, classical_maxwellian, ball_indicator)"),
                ))
            }
        };
        set.finish()?;
    }
    if let (IcSpec::QuantumMaxwellian { .. }, StatsSpec::FermiR { .. } | StatsSpec::BoseR { .. }) = (&c.ic, c.stats) {
        let e = &entries["stats"];
        return Err(at(
            e,
            "r-form statistics need an initial profile whose moments do not depend on ħ (not quantum_maxwellian)".into(),
        ));
    }
    if let (IcSpec::QuantumMaxwellian { .. }, StatsSpec::Classical) = (&c.ic, c.stats) {
        let e = entries.get("ic").expect("quantum_maxwellian was set explicitly");
        return Err(at(e, "quantum_maxwellian needs fermi or bose statistics".into()));
    }
    if let Some(v) = int("record_every")? {
        if v == 0 {
            return Err(at(&entries["record_every"], "record_every must be positive".into()));
        }
        c.record_every = v;
    }
    if let Some(e) = entries.get("snapshot_times") {
        let mut lx = lexer(e);
        // Brackets are optional: `0, 1` and `[0, 1]` are the same list.
        let bracketed = lx.peek() == Some(b'[');
        if bracketed {
            lx.pos += 1;
        }
        loop {
            let t = lx.number()?;
            if t < 0.0 {
                return Err(lx.err("snapshot times must be non-negative"));
            }
            c.snapshot_times.push(t);
            match lx.peek() {
                Some(b',') => lx.pos += 1,
                Some(b']') if bracketed => {
                    lx.pos += 1;
                    if !lx.at_end() {
                        return Err(lx.err("unexpected text after ']'"));
                    }
                    break;
                }
                None if !bracketed => break,
                None => return Err(lx.err("expected ']'")),
                _ => return Err(lx.err("expected ','")),
            }
        }
    }
    if let Some(v) = boolean("deterministic")? {
        c.deterministic = v;
    }
    if let Some(v) = int("threads")? {
        c.threads = v;
    }
    if let Some(v) = real("blowup_bound")? {
        if v <= 0.0 {
            return Err(at(&entries["blowup_bound"], "blowup_bound must be positive".into()));
        }
        c.blowup_bound = v;
    }
    Ok(c)
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
