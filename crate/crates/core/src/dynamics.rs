//! Time integration of the rescaled equation
//! `∂_t G + ∇_ξ·(a G) = c_pre Q_{α_eff}(G)` with
//! `a(ξ) = (ω̇/ω) ξ − λ (πω/L) u̇`.
//!
//! A forward Euler step evaluates the collision term, advances the moments by
//! their collision rates, derives the new temperature and thermal speed `ω`
//! from the statistics, applies the frame-motion divergence and finally
//! updates `G`. Without rescaling `ω ≡ 1`, the divergence vanishes and the
//! moments are recomputed from the new `G`.

use std::f64::consts::PI;

use crate::collision::CollisionOperator;
use crate::diagnostics::{self, Moments};
use crate::error::{CollisionError, DynamicsError};
use crate::frame::Frame;
use crate::grid::{GridSpec, Transform};
use crate::stats::{condensate_temperature, solve_from_mass_energy, Degeneracy, ParticleStatistics};
use crate::Complex64;

/// Lower bound on `ω` when the temperature reaches zero at Fermi saturation.
pub const OMEGA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    Euler,
    Rk2Ssp,
}

/// Sticky conditions met during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub saturated: bool,
    pub undetermined: bool,
    pub omega_floored: bool,
    pub condensate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: usize,
    pub time: f64,
    pub g: Vec<f64>,
    pub frame: Frame,
    pub moments: Moments,
    pub flags: Flags,
}

/// Result of one step: the new state and the collision increment `c_pre Q`
/// evaluated on the old one.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: SimState,
    pub collision: Vec<f64>,
}

pub struct Solver {
    pub op: CollisionOperator,
    pub stats: ParticleStatistics,
    /// Collision scaling `c`.
    pub c: f64,
    pub dt: f64,
    pub rescaling: bool,
}

impl Solver {
    pub fn grid(&self) -> &GridSpec {
        self.op.grid()
    }

    /// `(α_eff, c_pre)` for a frame.
    pub fn scale_factors(&self, frame: &Frame) -> (f64, f64) {
        frame.scale_factors(self.stats.alpha(), self.op.table().gamma, self.c)
    }

    /// Starting state from physical samples `f0` on the nodes of `frame`.
    pub fn initial_state(&self, frame: Frame, f0: &[f64]) -> SimState {
        let g = frame.to_rescaled(f0);
        let moments = diagnostics::moments(self.grid(), &frame, &g);
        SimState { step: 0, time: 0.0, g, frame, moments, flags: Flags::default() }
    }

    /// Collision increment `c_pre Q_{α_eff}(G)` in the state's frame.
    pub fn collision(&self, s: &SimState) -> Result<Vec<f64>, DynamicsError> {
        let (alpha_eff, c_pre) = self.scale_factors(&s.frame);
        self.op.assemble(&s.g, alpha_eff, c_pre).map_err(|e| blowup(e, s))
    }

    pub fn step(&self, s: &SimState, integrator: Integrator) -> Result<StepOutput, DynamicsError> {
        match integrator {
            Integrator::Euler => self.euler_step(s),
            Integrator::Rk2Ssp => self.rk2_ssp_step(s),
        }
    }

    pub fn euler_step(&self, s: &SimState) -> Result<StepOutput, DynamicsError> {
        let collision = self.collision(s)?;
        let state = self.euler_with(s, &collision)?;
        Ok(StepOutput { state, collision })
    }

    /// Heun / SSP-RK2: two Euler stages, each in its own frame, then the
    /// linear average of `G`, the frame and the moments.
    pub fn rk2_ssp_step(&self, s: &SimState) -> Result<StepOutput, DynamicsError> {
        let first = self.euler_step(s)?;
        let second = self.euler_step(&first.state)?;
        let mut out = average(s, &second.state);
        out.step = s.step + 1;
        out.time = s.time + self.dt;
        if !self.rescaling {
            out.moments = diagnostics::moments(self.grid(), &out.frame, &out.g);
        }
        check_field(&out, self.op.blowup_bound)?;
        Ok(StepOutput { state: out, collision: first.collision })
    }

    fn euler_with(&self, s: &SimState, collision: &[f64]) -> Result<SimState, DynamicsError> {
        let grid = self.grid();
        let dt = self.dt;
        let mut flags = s.flags;
        let mut next_frame = s.frame;
        let moments;
        let mut g = s.g.clone();

        if self.rescaling {
            let r = s.frame.moment_rates(grid, collision, s.moments.u);
            let m = s.moments;
            let rho = m.rho + dt * r.mass;
            let mut u = [0.0; 3];
            for a in 0..grid.dim {
                u[a] = (m.rho * m.u[a] + dt * r.momentum[a]) / rho;
            }
            let e = (m.rho * m.e + dt * r.energy) / rho;
            if !(rho.is_finite() && e.is_finite()) || rho <= 0.0 || e <= 0.0 {
                return Err(DynamicsError::Moments(format!(
                    "non-physical moments rho = {rho}, e = {e} at step {}",
                    s.step + 1
                )));
            }
            let omega = self.thermal_speed(rho, u, e, s.frame.omega, &mut flags)?;
            next_frame.omega = omega;
            next_frame.u = u;
            let omega_rate = (omega - s.frame.omega) / (dt * s.frame.omega);
            let mut u_rate = [0.0; 3];
            for a in 0..grid.dim {
                u_rate[a] = (u[a] - s.frame.u[a]) / dt;
            }
            let div = divergence_term(self.op.transform(), &s.g, &s.frame, omega_rate, u_rate);
            for ((gj, q), dj) in g.iter_mut().zip(collision).zip(&div) {
                *gj += dt * (q - dj);
            }
            let u2: f64 = u[..grid.dim].iter().map(|x| x * x).sum();
            moments = Moments { rho, u, ec: rho * u2 + 2.0 * rho * e, e };
        } else {
            for (gj, q) in g.iter_mut().zip(collision) {
                *gj += dt * q;
            }
            moments = diagnostics::moments(grid, &next_frame, &g);
        }
        let out = SimState { step: s.step + 1, time: s.time + dt, g, frame: next_frame, moments, flags };
        check_field(&out, self.op.blowup_bound)?;
        Ok(out)
    }

    /// Thermal speed for the given moments: `√T` for quantum particles,
    /// `√(T + |u|²/d)` for classical ones. Keeps `previous` when no limit
    /// state exists and floors `ω` at saturation, recording both in `flags`.
    pub fn thermal_speed(
        &self,
        rho: f64,
        u: [f64; 3],
        e: f64,
        previous: f64,
        flags: &mut Flags,
    ) -> Result<f64, DynamicsError> {
        let d = self.grid().dim as f64;
        if !self.stats.is_quantum() {
            let t = 2.0 * e / d;
            let u2: f64 = u.iter().map(|x| x * x).sum();
            return Ok((t + u2 / d).sqrt());
        }
        let rep = solve_from_mass_energy(&self.stats, rho, e)?;
        let t = match rep.class {
            Degeneracy::Regular => rep.temperature,
            Degeneracy::Condensate => {
                flags.condensate = true;
                condensate_temperature(&self.stats, rho, e)
            }
            Degeneracy::Saturated => {
                flags.saturated = true;
                0.0
            }
            Degeneracy::Undetermined => {
                flags.undetermined = true;
                return Ok(previous);
            }
        };
        let omega = t.sqrt();
        if omega < OMEGA_FLOOR {
            flags.omega_floored = true;
            return Ok(OMEGA_FLOOR);
        }
        Ok(omega)
    }
}

fn average(a: &SimState, b: &SimState) -> SimState {
    let mix = |x: f64, y: f64| 0.5 * (x + y);
    let g = a.g.iter().zip(&b.g).map(|(x, y)| mix(*x, *y)).collect();
    let mut frame = a.frame;
    frame.omega = mix(a.frame.omega, b.frame.omega);
    let mut u = [0.0; 3];
    let mut mu = [0.0; 3];
    for k in 0..3 {
        u[k] = mix(a.frame.u[k], b.frame.u[k]);
        mu[k] = mix(a.moments.u[k], b.moments.u[k]);
    }
    frame.u = u;
    let moments = Moments {
        rho: mix(a.moments.rho, b.moments.rho),
        u: mu,
        ec: mix(a.moments.ec, b.moments.ec),
        e: mix(a.moments.e, b.moments.e),
    };
    let flags = Flags {
        saturated: a.flags.saturated || b.flags.saturated,
        undetermined: a.flags.undetermined || b.flags.undetermined,
        omega_floored: a.flags.omega_floored || b.flags.omega_floored,
        condensate: a.flags.condensate || b.flags.condensate,
    };
    SimState { step: b.step, time: b.time, g, frame, moments, flags }
}

fn blowup(e: CollisionError, s: &SimState) -> DynamicsError {
    match e {
        CollisionError::BlowUp { sup_norm, threshold } => {
            if sup_norm.is_finite() {
                DynamicsError::BlowUp { step: s.step, time: s.time, sup_norm, threshold }
            } else {
                DynamicsError::NonFinite { step: s.step, time: s.time }
            }
        }
        other => DynamicsError::Moments(other.to_string()),
    }
}

fn check_field(s: &SimState, bound: f64) -> Result<(), DynamicsError> {
    let mut sup = 0.0f64;
    for v in &s.g {
        if !v.is_finite() {
            return Err(DynamicsError::NonFinite { step: s.step, time: s.time });
        }
        sup = sup.max(v.abs());
    }
    if sup > bound {
        return Err(DynamicsError::BlowUp { step: s.step, time: s.time, sup_norm: sup, threshold: bound });
    }
    Ok(())
}

/// `∇_ξ·(a G)` with `a(ξ) = ω_rate ξ − λ (πω/L) u_rate`, evaluated
/// spectrally: the products `a_i G` are formed in physical space,
/// transformed, multiplied by `i k_i` and summed.
pub fn divergence_term(tr: &Transform, g: &[f64], frame: &Frame, omega_rate: f64, u_rate: [f64; 3]) -> Vec<f64> {
    let grid = tr.grid();
    if omega_rate == 0.0 && u_rate.iter().all(|&x| x == 0.0) {
        return vec![0.0; g.len()];
    }
    let shift = frame.lambda() * PI * frame.omega / frame.half_width_l;
    let mut acc = vec![Complex64::default(); g.len()];
    for axis in 0..grid.dim {
        let prod: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(j, &gj)| (omega_rate * grid.node(j)[axis] - shift * u_rate[axis]) * gj)
            .collect();
        let der = tr.fourier_derivative(&tr.forward(&prod), axis);
        for (a, v) in acc.iter_mut().zip(der) {
            *a += v;
        }
    }
    tr.inverse_real(&acc)
}
