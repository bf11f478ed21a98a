//! Predicted large-time limit states and the initial profiles of the
//! experiments.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::diagnostics::Moments;
use crate::error::{EquilibriumError, StatsError};
use crate::frame::Frame;
use crate::grid::GridSpec;
use crate::stats::{solve_from_mass_energy, Degeneracy, ParticleStatistics, StatsKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquilibriumState {
    Classical { rho: f64, u: [f64; 3], t: f64 },
    /// Quantum Maxwellian `1/|α| / (z^{-1} e^{|v−u|²/2T} ± 1)`, fugacity as `ln z`.
    Quantum { stats: ParticleStatistics, log_z: f64, t: f64, u: [f64; 3] },
    /// 3D Bose regular part at `z = 1`; the Dirac mass `m0` at `u` is metadata.
    Condensate { stats: ParticleStatistics, m0: f64, t: f64, u: [f64; 3] },
    /// Fermi saturation `ħ^{-d} 1_{B(u, A)}`.
    Saturated { stats: ParticleStatistics, rho: f64, u: [f64; 3], radius: f64 },
    Undetermined,
}

/// Value of an equilibrium at one velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    /// Regular density; `+∞` at the singular point of a `z = 1` Bose state.
    pub density: f64,
    /// Weight of a Dirac mass located at this velocity.
    pub point_mass: f64,
}

/// Samples of a limit state on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub f: Vec<f64>,
    /// Condensed mass not represented in `f`.
    pub point_mass: f64,
}

/// Radius `A = √(2e(d+2)/d)` of the ball carrying mass `ρ` and energy `e`
/// with a constant density.
pub fn ball_radius(dim: usize, e: f64) -> f64 {
    let d = dim as f64;
    (2.0 * e * (d + 2.0) / d).sqrt()
}

/// Volume of the `d`-ball of radius `r`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0) * r.powf(d)
}

fn dist2(dim: usize, v: &[f64; 3], u: &[f64; 3]) -> f64 {
    (0..dim).map(|a| (v[a] - u[a]).powi(2)).sum()
}

/// Limit state predicted for a gas with the given moments.
pub fn classify(m: &Moments, stats: &ParticleStatistics) -> Result<EquilibriumState, StatsError> {
    let rep = solve_from_mass_energy(stats, m.rho, m.e)?;
    Ok(match (stats.kind, rep.class) {
        (StatsKind::Classical, _) => EquilibriumState::Classical { rho: m.rho, u: m.u, t: rep.temperature },
        (_, Degeneracy::Regular) => EquilibriumState::Quantum {
            stats: *stats,
            log_z: rep.log_z.expect("regular quantum state has a fugacity"),
            t: rep.temperature,
            u: m.u,
        },
        (_, Degeneracy::Condensate) => EquilibriumState::Condensate {
            stats: *stats,
            m0: rep.condensate_mass,
            t: rep.temperature,
            u: m.u,
        },
        (_, Degeneracy::Saturated) => EquilibriumState::Saturated {
            stats: *stats,
            rho: m.rho,
            u: m.u,
            radius: ball_radius(stats.dim, m.e),
        },
        (_, Degeneracy::Undetermined) => EquilibriumState::Undetermined,
    })
}

/// Quantum Maxwellian value with `x = |v−u|²/2T`; bosons use `expm1` so the
/// `z → 1` limit keeps full precision.
fn quantum_value(stats: &ParticleStatistics, log_z: f64, x: f64) -> f64 {
    let a = stats.alpha().abs();
    match stats.kind {
        StatsKind::BoseEinstein => {
            let den = (x - log_z).exp_m1();
            if den <= 0.0 {
                f64::INFINITY
            } else {
                1.0 / (a * den)
            }
        }
        _ => {
            let y = x - log_z;
            if y < 0.0 {
                // z^{-1}e^x small: rewrite as e^{-y}/(1 + e^{-y}) against overflow.
                1.0 / (a * (y.exp() + 1.0))
            } else {
                let e = (-y).exp();
                e / (a * (1.0 + e))
            }
        }
    }
}

impl EquilibriumState {
    pub fn eval(&self, dim: usize, v: &[f64; 3]) -> Result<PointValue, EquilibriumError> {
        let regular = |density| Ok(PointValue { density, point_mass: 0.0 });
        match *self {
            EquilibriumState::Classical { rho, u, t } => {
                let d = dim as f64;
                regular(rho * (2.0 * PI * t).powf(-d / 2.0) * (-dist2(dim, v, &u) / (2.0 * t)).exp())
            }
            EquilibriumState::Quantum { stats, log_z, t, u } => {
                regular(quantum_value(&stats, log_z, dist2(dim, v, &u) / (2.0 * t)))
            }
            EquilibriumState::Condensate { stats, m0, t, u } => {
                let r2 = dist2(dim, v, &u);
                let density = quantum_value(&stats, 0.0, r2 / (2.0 * t));
                Ok(PointValue { density, point_mass: if r2 == 0.0 { m0 } else { 0.0 } })
            }
            EquilibriumState::Saturated { stats, u, radius, .. } => {
                let inside = dist2(dim, v, &u) < radius * radius;
                regular(if inside { 1.0 / stats.alpha().abs() } else { 0.0 })
            }
            EquilibriumState::Undetermined => Err(EquilibriumError::Undetermined),
        }
    }

    /// Samples the regular part at the frame's velocity nodes. A node sitting
    /// on the singular point of a `z = 1` Bose state (up to round-off in `u`)
    /// is reported instead of producing an infinite or meaningless sample.
    pub fn discretize(&self, grid: &GridSpec, frame: &Frame) -> Result<Discretized, EquilibriumError> {
        let near = match self {
            EquilibriumState::Condensate { u, .. } => {
                let h = frame.cell_volume(grid).powf(1.0 / grid.dim as f64);
                Some((*u, (1e-9 * h).powi(2)))
            }
            _ => None,
        };
        let mut f = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let v = frame.velocity(grid, j);
            let p = self.eval(grid.dim, &v)?;
            let on_singularity = near.is_some_and(|(u, tol2)| dist2(grid.dim, &v, &u) <= tol2);
            if !p.density.is_finite() || on_singularity {
                return Err(EquilibriumError::SingularNode { index: j });
            }
            f.push(p.density);
        }
        let point_mass = match self {
            EquilibriumState::Condensate { m0, .. } => *m0,
            _ => 0.0,
        };
        Ok(Discretized { f, point_mass })
    }
}

/// Initial distributions of the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    /// Quantum Maxwellian with mass `ρ`, velocity `u` and temperature `σ`.
    QuantumMaxwellian { rho: f64, u: [f64; 3], sigma: f64 },
    ClassicalMaxwellian { rho: f64, u: [f64; 3], sigma: f64 },
    /// Constant density on the ball `B(u, A)` with `A = √(2e(d+2)/d)`.
    BallIndicator { rho: f64, u: [f64; 3], e: f64 },
}

impl InitialProfile {
    /// Continuous moments `(ρ, u, e)`; the quantum Maxwellian needs the
    /// statistics to relate `σ` and `e`.
    pub fn moments(&self, dim: usize, stats: &ParticleStatistics) -> Result<Moments, StatsError> {
        let d = dim as f64;
        let (rho, u, e) = match *self {
            InitialProfile::QuantumMaxwellian { rho, u, sigma } => {
                (rho, u, crate::stats::solve_from_mass_temperature(stats, rho, sigma)?.energy)
            }
            InitialProfile::ClassicalMaxwellian { rho, u, sigma } => (rho, u, d * sigma / 2.0),
            InitialProfile::BallIndicator { rho, u, e } => (rho, u, e),
        };
        let u2: f64 = u[..dim].iter().map(|x| x * x).sum();
        Ok(Moments { rho, u, ec: rho * u2 + 2.0 * rho * e, e })
    }

    /// Profile as a closed-form state, resolving the fugacity of a quantum
    /// Maxwellian from `(ρ, σ)`.
    pub fn state(&self, dim: usize, stats: &ParticleStatistics) -> Result<ProfileState, StatsError> {
        Ok(match *self {
            InitialProfile::QuantumMaxwellian { rho, u, sigma } => {
                let s = crate::stats::solve_from_mass_temperature(stats, rho, sigma)?;
                match s.log_z {
                    Some(log_z) if stats.is_quantum() => {
                        ProfileState::Equilibrium(EquilibriumState::Quantum { stats: *stats, log_z, t: sigma, u })
                    }
                    _ => ProfileState::Equilibrium(EquilibriumState::Classical { rho, u, t: sigma }),
                }
            }
            InitialProfile::ClassicalMaxwellian { rho, u, sigma } => {
                ProfileState::Equilibrium(EquilibriumState::Classical { rho, u, t: sigma })
            }
            InitialProfile::BallIndicator { rho, u, e } => {
                let radius = ball_radius(dim, e);
                ProfileState::Ball { height: rho / ball_volume(dim, radius), u, radius }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileState {
    Equilibrium(EquilibriumState),
    Ball { height: f64, u: [f64; 3], radius: f64 },
}

impl ProfileState {
    pub fn discretize(&self, grid: &GridSpec, frame: &Frame) -> Result<Vec<f64>, EquilibriumError> {
        match self {
            ProfileState::Equilibrium(s) => Ok(s.discretize(grid, frame)?.f),
            ProfileState::Ball { height, u, radius } => Ok((0..grid.len())
                .map(|j| {
                    let v = frame.velocity(grid, j);
                    if dist2(grid.dim, &v, u) < radius * radius {
                        *height
                    } else {
                        0.0
                    }
                })
                .collect()),
        }
    }
}
