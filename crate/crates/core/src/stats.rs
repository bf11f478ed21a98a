//! Particle statistics, fugacity solves and degeneracy classification.
//!
//! A quantum Maxwellian with mass `ρ`, temperature `T` and fugacity `z`
//! satisfies `ρ = (2πT)^ν K_ν(z)/|α|` and `e = νT K_{ν+1}(z)/K_ν(z)` with
//! `ν = d/2`, where `K = F` for fermions and `K = B` for bosons. Fugacities are
//! carried as `ln z`: fermionic `z` overflows in the degenerate regime and
//! bosonic `z` loses resolution next to 1.

use std::f64::consts::PI;

use crate::error::StatsError;
use crate::special::{bose_einstein_b, fermi_dirac_mu, zeta};

/// Iteration cap of [`brent`].
pub const BRENT_MAX_ITER: usize = 200;

/// Relative distance to `sup I_eq` under which a Fermi gas counts as saturated.
pub const SATURATION_TOL: f64 = 1e-9;

const SOLVE_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatsKind {
    Classical,
    FermiDirac,
    BoseEinstein,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleStatistics {
    pub kind: StatsKind,
    /// Rescaled Planck constant; ignored for classical particles.
    pub hbar: f64,
    pub dim: usize,
}

impl ParticleStatistics {
    pub fn classical(dim: usize) -> Self {
        Self { kind: StatsKind::Classical, hbar: 0.0, dim }
    }

    pub fn fermi(dim: usize, hbar: f64) -> Self {
        Self { kind: StatsKind::FermiDirac, hbar, dim }
    }

    pub fn bose(dim: usize, hbar: f64) -> Self {
        Self { kind: StatsKind::BoseEinstein, hbar, dim }
    }

    /// `α = +ħ^d` for fermions, `-ħ^d` for bosons, `0` for classical particles.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            StatsKind::Classical => 0.0,
            StatsKind::FermiDirac => self.hbar.powi(self.dim as i32),
            StatsKind::BoseEinstein => -self.hbar.powi(self.dim as i32),
        }
    }

    pub fn nu(&self) -> f64 {
        self.dim as f64 / 2.0
    }

    pub fn is_quantum(&self) -> bool {
        self.kind != StatsKind::Classical
    }

    fn check(&self) -> Result<(), StatsError> {
        if self.is_quantum() && !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(StatsError::NonPositiveHbar);
        }
        Ok(())
    }

    /// Complete integral `K_ν(e^{ℓ})` of this statistics at log-fugacity `ℓ`.
    pub fn k_integral(&self, nu: f64, log_z: f64) -> f64 {
        match self.kind {
            StatsKind::FermiDirac => fermi_dirac_mu(nu, log_z),
            StatsKind::BoseEinstein => bose_einstein_b(nu, (-log_z).max(0.0)),
            StatsKind::Classical => log_z.exp(),
        }
    }

    /// Degeneracy parameter `η = |α| ρ (d/(4πe))^{d/2}`.
    pub fn eta(&self, rho: f64, e: f64) -> f64 {
        let d = self.dim as f64;
        self.alpha().abs() * rho * (d / (4.0 * PI * e)).powf(d / 2.0)
    }
}

/// Upper end of the admissible interval `I_eq` for `η`; infinite when there
/// is no bound (2D bosons, classical particles).
pub fn i_eq_upper(kind: StatsKind, dim: usize) -> f64 {
    match (kind, dim) {
        (StatsKind::FermiDirac, 2) => 2.0,
        (StatsKind::FermiDirac, _) => 5.0 / 3.0 * (10.0 / PI).sqrt(),
        (StatsKind::BoseEinstein, 3) => zeta(1.5).powf(2.5) / zeta(2.5).powf(1.5),
        _ => f64::INFINITY,
    }
}

/// Threshold `ħ*` at which `η(ħ*) = sup I_eq` for the moments `(ρ, e)`.
/// `None` when there is no finite threshold.
pub fn hbar_star(kind: StatsKind, dim: usize, rho: f64, e: f64) -> Option<f64> {
    let k_up = i_eq_upper(kind, dim);
    if !k_up.is_finite() {
        return None;
    }
    let d = dim as f64;
    Some((k_up * (4.0 * PI * e / d).powf(d / 2.0) / rho).powf(1.0 / d))
}

/// Brent's method on a sign-changing bracket. Converges when the bracket is
/// narrower than `tol·max(1, |x|)` or `f` vanishes exactly.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, StatsError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(StatsError::Bracket("brent"));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..BRENT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol * b.abs().max(1.0);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(StatsError::Domain("brent: objective returned NaN"));
        }
    }
    Err(StatsError::Iterations(BRENT_MAX_ITER))
}

/// Widens `[lo, hi]` geometrically around an increasing `f` until it brackets
/// a root, then runs [`brent`].
fn solve_increasing<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    what: &'static str,
) -> Result<f64, StatsError> {
    for _ in 0..60 {
        let (flo, fhi) = (f(lo), f(hi));
        if flo <= 0.0 && fhi >= 0.0 {
            return brent(f, lo, hi, SOLVE_TOL);
        }
        let w = hi - lo;
        if flo > 0.0 {
            lo -= w;
        }
        if fhi < 0.0 {
            hi += w;
        }
    }
    Err(StatsError::Bracket(what))
}

/// Solves `K_ν(e^ℓ) = y` for the log-fugacity `ℓ`. Bosons must have
/// `y ≤ B_ν(1)`.
fn log_fugacity_for(stats: &ParticleStatistics, y: f64) -> Result<f64, StatsError> {
    let nu = stats.nu();
    let ly = y.ln();
    match stats.kind {
        StatsKind::FermiDirac => {
            solve_increasing(|mu| stats.k_integral(nu, mu).ln() - ly, -40.0, 200.0, "Fermi fugacity")
        }
        StatsKind::BoseEinstein => {
            if nu == 1.0 {
                // B_1(z) = -ln(1 - z) inverts in closed form.
                return Ok((-(-y).exp()).ln_1p());
            }
            // Increasing in t = -ln b where b = -ln z.
            let t = solve_increasing(
                |t| bose_einstein_b(nu, (-t).exp()).ln() - ly,
                -5.0,
                60.0,
                "Bose fugacity",
            )?;
            Ok(-(-t).exp())
        }
        StatsKind::Classical => Ok(ly),
    }
}

/// Fugacity and energy of the equilibrium with prescribed mass and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassTemperatureSolution {
    /// `ln z`; `None` for classical particles.
    pub log_z: Option<f64>,
    /// Energy per unit mass, `e`.
    pub energy: f64,
    /// Condensed mass (3D bosons beyond the critical density), else 0.
    pub condensate_mass: f64,
}

impl MassTemperatureSolution {
    pub fn z(&self) -> Option<f64> {
        self.log_z.map(f64::exp)
    }
}

pub fn solve_from_mass_temperature(
    stats: &ParticleStatistics,
    rho: f64,
    t: f64,
) -> Result<MassTemperatureSolution, StatsError> {
    stats.check()?;
    if !(rho > 0.0 && t > 0.0 && rho.is_finite() && t.is_finite()) {
        return Err(StatsError::NonPositiveMoments);
    }
    let nu = stats.nu();
    if !stats.is_quantum() {
        return Ok(MassTemperatureSolution { log_z: None, energy: nu * t, condensate_mass: 0.0 });
    }
    let a = stats.alpha().abs();
    let y = rho * a / (2.0 * PI * t).powf(nu);
    if stats.kind == StatsKind::BoseEinstein && nu > 1.0 && y >= zeta(nu) {
        let regular = (2.0 * PI * t).powf(nu) * zeta(nu) / a;
        let energy = nu * t * (2.0 * PI * t).powf(nu) * zeta(nu + 1.0) / a / rho;
        return Ok(MassTemperatureSolution {
            log_z: Some(0.0),
            energy,
            condensate_mass: rho - regular,
        });
    }
    let log_z = log_fugacity_for(stats, y)?;
    let energy = nu * t * stats.k_integral(nu + 1.0, log_z) / stats.k_integral(nu, log_z);
    Ok(MassTemperatureSolution { log_z: Some(log_z), energy, condensate_mass: 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// A regular (quantum) Maxwellian exists.
    Regular,
    /// 3D bosons above the critical density: `z = 1` plus a condensed mass.
    Condensate,
    /// Fermions exactly at `sup I_eq`: the saturated indicator state.
    Saturated,
    /// Fermions beyond `sup I_eq`; no limit state is predicted.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyReport {
    pub eta: f64,
    pub class: Degeneracy,
    /// `ln z`; `+∞` when saturated, `None` when classical or undetermined.
    pub log_z: Option<f64>,
    /// Temperature; 0 when saturated, NaN when undetermined.
    pub temperature: f64,
    pub condensate_mass: f64,
}

impl DegeneracyReport {
    pub fn z(&self) -> Option<f64> {
        self.log_z.map(f64::exp)
    }
}

/// Classifies the limit state of a gas with mass `ρ` and energy `e` and solves
/// `η = K_ν(z)^{ν+1}/K_{ν+1}(z)^ν` for the fugacity when it exists.
pub fn solve_from_mass_energy(
    stats: &ParticleStatistics,
    rho: f64,
    e: f64,
) -> Result<DegeneracyReport, StatsError> {
    stats.check()?;
    if !(rho > 0.0 && e > 0.0 && rho.is_finite() && e.is_finite()) {
        return Err(StatsError::NonPositiveMoments);
    }
    let nu = stats.nu();
    let d = stats.dim as f64;
    let eta = stats.eta(rho, e);
    let regular = |log_z: f64| {
        let t = (rho * stats.alpha().abs() / stats.k_integral(nu, log_z)).powf(1.0 / nu) / (2.0 * PI);
        DegeneracyReport { eta, class: Degeneracy::Regular, log_z: Some(log_z), temperature: t, condensate_mass: 0.0 }
    };
    let sup = i_eq_upper(stats.kind, stats.dim);
    let ratio = |log_z: f64| {
        (nu + 1.0) * stats.k_integral(nu, log_z).ln() - nu * stats.k_integral(nu + 1.0, log_z).ln()
    };
    let le = eta.ln();
    match stats.kind {
        StatsKind::Classical => Ok(DegeneracyReport {
            eta,
            class: Degeneracy::Regular,
            log_z: None,
            temperature: 2.0 * e / d,
            condensate_mass: 0.0,
        }),
        StatsKind::FermiDirac => {
            if (eta / sup - 1.0).abs() <= SATURATION_TOL {
                return Ok(DegeneracyReport {
                    eta,
                    class: Degeneracy::Saturated,
                    log_z: Some(f64::INFINITY),
                    temperature: 0.0,
                    condensate_mass: 0.0,
                });
            }
            if eta > sup {
                return Ok(DegeneracyReport {
                    eta,
                    class: Degeneracy::Undetermined,
                    log_z: None,
                    temperature: f64::NAN,
                    condensate_mass: 0.0,
                });
            }
            let mu = solve_increasing(|mu| ratio(mu) - le, -40.0, 200.0, "Fermi fugacity")?;
            Ok(regular(mu))
        }
        StatsKind::BoseEinstein => {
            if eta > sup {
                // Critical temperature of the regular part; the rest condenses.
                let t = 2.0 * e * zeta(1.5) / (3.0 * zeta(2.5));
                let m0 = rho - (2.0 * PI * t).powf(1.5) * zeta(1.5) / stats.alpha().abs();
                return Ok(DegeneracyReport {
                    eta,
                    class: Degeneracy::Condensate,
                    log_z: Some(0.0),
                    temperature: t,
                    condensate_mass: m0,
                });
            }
            if eta == sup {
                return Ok(regular(0.0));
            }
            let t = solve_increasing(|t| ratio(-(-t).exp()) - le, -5.0, 60.0, "Bose fugacity")?;
            Ok(regular(-(-t).exp()))
        }
    }
}

/// Temperature of a 3D Bose gas carrying a condensate, from energy
/// conservation of the regular part: `T = [2|α|ρe / (3ζ(5/2)(2π)^{3/2})]^{2/5}`.
pub fn condensate_temperature(stats: &ParticleStatistics, rho: f64, e: f64) -> f64 {
    (2.0 * stats.alpha().abs() * rho * e / (3.0 * zeta(2.5) * (2.0 * PI).powf(1.5))).powf(0.4)
}
