//! Named experiment presets.
//!
//! Residual presets: `residual.<stats><d>d.sigma<σ>.L<L>[.rho<ρ>][.ub]`,
//! with `<stats>` one of `fd` (Fermi–Dirac) or `be` (Bose–Einstein), for
//! example `residual.fd2d.sigma05.L4`. The initial state is the quantum
//! Maxwellian with `ħ = 3`, `ρ = 1` unless given, centred at `0` or at
//! `u_b = 8/(3√2+2)(1,1)` with `.ub`.
//!
//! Relaxation presets: `relax.<stats><d>d.<ic>.r<r>` with `<ic>` either
//! `ball` (indicator of the ball carrying `ρ = 1`, `e = 1`) or `maxwell`
//! (classical Maxwellian `ρ = 1`, `σ = 1`), and `ħ = r ħ*`. For example
//! `relax.fd2d.ball.r05` is the 2D Fermi gas from the ball with `r = 0.5`.
//!
//! Numeric tokens drop the decimal point after the first digit: `05` is
//! 0.5, `105` is 1.05, `1` is 1 and `4p5` is 4.5 (for `L` only).

use crate::config::{IcSpec, IntegratorSpec, KernelSpec, SimConfig, StatsSpec};

/// Planck constant of the residual experiments.
pub const RESIDUAL_HBAR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCase {
    pub id: String,
    /// Configuration with the smallest default grid; `n` and `rescaling`
    /// vary per table cell.
    pub config: SimConfig,
    pub grids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxCase {
    pub id: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Residual(ResidualCase),
    Relax(RelaxCase),
}

/// `05` → 0.5, `105` → 1.05, `1` → 1.
fn shifted_decimal(tok: &str) -> Option<f64> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let (head, tail) = tok.split_at(1);
    format!("{head}.{tail}").trim_end_matches('.').parse().ok()
}

fn stats_dim(tok: &str) -> Option<(bool, usize)> {
    let fermi = match tok.get(..2)? {
        "fd" => true,
        "be" => false,
        _ => return None,
    };
    match &tok[2..] {
        "2d" => Some((fermi, 2)),
        "3d" => Some((fermi, 3)),
        _ => None,
    }
}

/// `u_b = 8/(3√2+2)(1,1)`, the off-centre velocity of the 2D tables.
pub fn u_b() -> [f64; 3] {
    let c = 8.0 / (3.0 * 2f64.sqrt() + 2.0);
    [c, c, 0.0]
}

pub fn residual_case(id: &str) -> Option<ResidualCase> {
    let parts: Vec<&str> = id.split('.').collect();
    if parts.len() < 4 || parts[0] != "residual" {
        return None;
    }
    let (fermi, dim) = stats_dim(parts[1])?;
    let sigma = shifted_decimal(parts[2].strip_prefix("sigma")?)?;
    let l: f64 = parts[3].strip_prefix('L')?.replace('p', ".").parse().ok()?;
    let mut rho = 1.0;
    let mut u = [0.0; 3];
    for extra in &parts[4..] {
        if let Some(r) = extra.strip_prefix("rho") {
            rho = shifted_decimal(r)?;
        } else if *extra == "ub" && dim == 2 {
            u = u_b();
        } else {
            return None;
        }
    }
    if !(sigma > 0.0 && l > 0.0 && rho > 0.0) {
        return None;
    }
    let stats = if fermi { StatsSpec::Fermi { hbar: RESIDUAL_HBAR } } else { StatsSpec::Bose { hbar: RESIDUAL_HBAR } };
    let config = SimConfig {
        dim,
        n: 16,
        l,
        kernel: if dim == 2 { KernelSpec::Maxwell2d } else { KernelSpec::Hardsphere3d },
        stats,
        rescaling: true,
        ic: IcSpec::QuantumMaxwellian { rho, u, sigma },
        t_final: 0.0,
        ..SimConfig::default()
    };
    let grids = if dim == 2 { vec![16, 32, 64] } else { vec![16] };
    Some(ResidualCase { id: id.to_string(), config, grids })
}

pub fn relax_case(id: &str) -> Option<RelaxCase> {
    let parts: Vec<&str> = id.split('.').collect();
    if parts.len() != 4 || parts[0] != "relax" {
        return None;
    }
    let (fermi, dim) = stats_dim(parts[1])?;
    let r = shifted_decimal(parts[3].strip_prefix('r')?)?;
    if r <= 0.0 {
        return None;
    }
    let ic = match parts[2] {
        "ball" => IcSpec::BallIndicator { rho: 1.0, u: [0.0; 3], e: 1.0 },
        "maxwell" => IcSpec::ClassicalMaxwellian { rho: 1.0, u: [0.0; 3], sigma: 1.0 },
        _ => return None,
    };
    let stats = if fermi { StatsSpec::FermiR { r } } else { StatsSpec::BoseR { r } };
    // Desk-scale grids: 64² instead of 128², 16³ instead of 32³. The 3D
    // Fermi box is not given for the relaxation runs; L = 8 matches the range
    // of the residual tables.
    let (n, l, t_final) = match (dim, fermi) {
        (2, _) => (64, 8.0, 30.0),
        (_, true) => (16, 8.0, 10.0),
        (_, false) => (16, 6.0, 10.0),
    };
    let config = SimConfig {
        dim,
        n,
        l,
        kernel: if dim == 2 { KernelSpec::Maxwell2d } else { KernelSpec::Hardsphere3d },
        stats,
        rescaling: false,
        integrator: IntegratorSpec::Rk2ssp,
        dt: 0.025,
        t_final,
        ic,
        ..SimConfig::default()
    };
    Some(RelaxCase { id: id.to_string(), config })
}

pub fn lookup(id: &str) -> Option<Preset> {
    residual_case(id).map(Preset::Residual).or_else(|| relax_case(id).map(Preset::Relax))
}

/// Every preset of the residual tables and relaxation runs.
pub fn catalogue() -> Vec<String> {
    let mut out = Vec::new();
    for s in ["fd2d", "be2d"] {
        for sigma in ["05", "1"] {
            for l in ["4", "6", "8", "10"] {
                out.push(format!("residual.{s}.sigma{sigma}.L{l}"));
                out.push(format!("residual.{s}.sigma{sigma}.L{l}.ub"));
            }
        }
    }
    for sigma in ["05", "1"] {
        for l in ["4", "6", "8"] {
            out.push(format!("residual.fd3d.sigma{sigma}.L{l}"));
            for rho in ["05", "02"] {
                out.push(format!("residual.be3d.sigma{sigma}.L{l}.rho{rho}"));
            }
        }
    }
    for r in ["01", "05", "08", "09", "095", "099", "1", "101", "105"] {
        out.push(format!("relax.fd2d.ball.r{r}"));
        out.push(format!("relax.fd2d.maxwell.r{r}"));
    }
    for r in ["01", "05", "08", "09", "095", "099", "1", "101"] {
        out.push(format!("relax.fd3d.ball.r{r}"));
        out.push(format!("relax.fd3d.maxwell.r{r}"));
    }
    for r in ["01", "05", "08", "09", "095", "1", "105"] {
        out.push(format!("relax.be3d.ball.r{r}"));
        out.push(format!("relax.be3d.maxwell.r{r}"));
    }
    out
}
