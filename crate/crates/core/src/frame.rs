//! Rescaling-velocity frames.
//!
//! A frame maps grid nodes `ξ_j` to velocities `v_j = λu + ξ_j/s` with
//! `s = πω/L`, and distributions by `f = μ s^d G`. The classical method is
//! the frame `(λ, ω, μ) = (0, 1, (L/π)^d)`; the rescaled method uses
//! `λ = μ = 1` with a time-dependent thermal speed `ω`.

use std::f64::consts::PI;

use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub half_width_l: f64,
    pub omega: f64,
    pub u: [f64; 3],
    pub mu: f64,
    /// `true` for `λ = 1` (velocity rescaling active).
    pub rescaled: bool,
}

/// Time derivatives of mass, momentum and `ρe` produced by a collision term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentRates {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl Frame {
    pub fn classical(dim: usize, half_width_l: f64) -> Self {
        Self {
            dim,
            half_width_l,
            omega: 1.0,
            u: [0.0; 3],
            mu: (half_width_l / PI).powi(dim as i32),
            rescaled: false,
        }
    }

    pub fn rescaled(dim: usize, half_width_l: f64, u: [f64; 3], omega: f64) -> Self {
        Self { dim, half_width_l, omega, u, mu: 1.0, rescaled: true }
    }

    pub fn lambda(&self) -> f64 {
        if self.rescaled {
            1.0
        } else {
            0.0
        }
    }

    /// `s = πω/L`, the factor turning velocities into ξ-units.
    pub fn scale(&self) -> f64 {
        PI * self.omega / self.half_width_l
    }

    /// `f = density_factor · G`, i.e. `μ s^d`.
    pub fn density_factor(&self) -> f64 {
        self.mu * self.scale().powi(self.dim as i32)
    }

    /// Velocity of grid node `flat`.
    pub fn velocity(&self, grid: &GridSpec, flat: usize) -> [f64; 3] {
        let xi = grid.node(flat);
        let s = self.scale();
        let lam = self.lambda();
        let mut v = [0.0; 3];
        for a in 0..self.dim {
            v[a] = lam * self.u[a] + xi[a] / s;
        }
        v
    }

    /// Velocity-space cell volume `Δv = Δξ s^{-d}`.
    pub fn cell_volume(&self, grid: &GridSpec) -> f64 {
        grid.cell_volume() / self.scale().powi(self.dim as i32)
    }

    pub fn to_rescaled(&self, f: &[f64]) -> Vec<f64> {
        let k = 1.0 / self.density_factor();
        f.iter().map(|v| v * k).collect()
    }

    pub fn from_rescaled(&self, g: &[f64]) -> Vec<f64> {
        let k = self.density_factor();
        g.iter().map(|v| v * k).collect()
    }

    /// Effective quantum coefficient `α μ s^d` and collision prefactor
    /// `c μ s^{-γ}` of the equation for `G`.
    pub fn scale_factors(&self, alpha: f64, gamma: f64, c: f64) -> (f64, f64) {
        let s = self.scale();
        (alpha * self.density_factor(), c * self.mu * s.powf(-gamma))
    }

    /// Moment rates of a rescaled collision increment `dG = c_pre·Q`:
    /// `Δξ μ Σ w_j dG_j` with weights `1`, `v_j` and `|v_j − u|²/2`, where `u`
    /// is the current mean velocity.
    pub fn moment_rates(&self, grid: &GridSpec, dg: &[f64], u: [f64; 3]) -> MomentRates {
        let w = grid.cell_volume() * self.mu;
        let mut out = MomentRates::default();
        for (j, &q) in dg.iter().enumerate() {
            let v = self.velocity(grid, j);
            out.mass += q;
            let mut c2 = 0.0;
            for a in 0..self.dim {
                out.momentum[a] += v[a] * q;
                let c = v[a] - u[a];
                c2 += c * c;
            }
            out.energy += 0.5 * c2 * q;
        }
        out.mass *= w;
        out.energy *= w;
        for m in &mut out.momentum {
            *m *= w;
        }
        out
    }
}
