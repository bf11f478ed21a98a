//! Moments, entropies, norms and residuals of a discrete distribution.
//!
//! Every quantity has two evaluations: from physical samples `f_j` at
//! velocities `v_j` with cell volume `Δv`, and directly from rescaled values
//! `G_j` through a [`Frame`]. Both must agree to round-off.
//!
//! Entropies follow the sign convention `H = Σ f ln f (+ quantum term)`, so
//! they decrease along a relaxation. Negative samples (Gibbs undershoots of
//! the spectral collision term) enter through `f ln|f|` and are counted;
//! only `αf ≥ 1` leaves the entropy undefined.

use crate::frame::Frame;
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub rho: f64,
    /// Mean velocity; zero for a zero field.
    pub u: [f64; 3],
    /// Kinetic energy `Σ |v|² f Δv` (no factor 1/2).
    pub ec: f64,
    /// Internal energy per unit mass, `1/(2ρ) Σ |v − u|² f Δv`.
    pub e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entropy {
    /// `negative` nodes had `f < 0`.
    Defined { value: f64, negative: usize },
    /// A sample violates the bound `αf < 1` (or is not finite).
    Undefined { node: usize },
}

impl Entropy {
    pub fn value(&self) -> Option<f64> {
        match self {
            Entropy::Defined { value, .. } => Some(*value),
            Entropy::Undefined { .. } => None,
        }
    }
}

/// Physical samples of a distribution.
#[derive(Debug, Clone)]
pub struct Samples {
    pub dim: usize,
    pub f: Vec<f64>,
    pub v: Vec<[f64; 3]>,
    pub dv: f64,
}

impl Samples {
    pub fn from_rescaled(grid: &GridSpec, frame: &Frame, g: &[f64]) -> Self {
        Self {
            dim: grid.dim,
            f: frame.from_rescaled(g),
            v: (0..grid.len()).map(|j| frame.velocity(grid, j)).collect(),
            dv: frame.cell_volume(grid),
        }
    }

    pub fn moments(&self) -> Moments {
        let d = self.dim;
        let mut rho = 0.0;
        let mut p = [0.0; 3];
        let mut ec = 0.0;
        for (f, v) in self.f.iter().zip(&self.v) {
            rho += f;
            for a in 0..d {
                p[a] += v[a] * f;
                ec += v[a] * v[a] * f;
            }
        }
        rho *= self.dv;
        ec *= self.dv;
        let u = if rho != 0.0 { p.map(|x| x * self.dv / rho) } else { [0.0; 3] };
        let mut e2 = 0.0;
        for (f, v) in self.f.iter().zip(&self.v) {
            let c2: f64 = (0..d).map(|a| (v[a] - u[a]).powi(2)).sum();
            e2 += c2 * f;
        }
        let e = if rho != 0.0 { e2 * self.dv / (2.0 * rho) } else { 0.0 };
        Moments { rho, u, ec, e }
    }

    pub fn stress_tensor(&self) -> [[f64; 3]; 3] {
        let m = self.moments();
        let mut t = [[0.0; 3]; 3];
        if m.rho == 0.0 {
            return t;
        }
        for (f, v) in self.f.iter().zip(&self.v) {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    t[a][b] += (v[a] - m.u[a]) * (v[b] - m.u[b]) * f;
                }
            }
        }
        t.map(|row| row.map(|x| x * self.dv / m.rho))
    }

    pub fn entropy(&self, alpha: f64) -> Entropy {
        let mut h = 0.0;
        let mut negative = 0;
        for (j, &f) in self.f.iter().enumerate() {
            negative += usize::from(f < 0.0);
            match entropy_density(f, alpha) {
                Some(v) => h += v,
                None => return Entropy::Undefined { node: j },
            }
        }
        Entropy::Defined { value: h * self.dv, negative }
    }

    /// `Δv Σ |f|^p` to the power `1/p`; `p = ∞` gives `max |f|`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp(&self.f, self.dv, p)
    }

    /// `‖f − f∞‖_{ℓ¹} = Δv Σ |f_j − f∞_j|`.
    pub fn relaxation_error(&self, f_inf: &[f64]) -> f64 {
        relaxation_error(&self.f, f_inf, self.dv)
    }

    /// `Δv Σ (df/dt)_j ψ(f_j)` with `ψ = ln(|f|/(1 − αf))`: the time
    /// derivative of [`Samples::entropy`] under the rate `df`. `None` when
    /// `ψ` is undefined at a node with nonzero rate.
    pub fn entropy_dissipation(&self, df: &[f64], alpha: f64) -> Option<f64> {
        let mut acc = 0.0;
        for (&f, &q) in self.f.iter().zip(df) {
            if q == 0.0 {
                continue;
            }
            if !(alpha * f < 1.0) || f == 0.0 || !f.is_finite() {
                return None;
            }
            acc += q * (f.abs() / (1.0 - alpha * f)).ln();
        }
        Some(acc * self.dv)
    }
}

/// `f ln|f| + (1 − αf)/α ln(1 − αf)`, reducing to `f ln|f|` at `α = 0`.
fn entropy_density(f: f64, alpha: f64) -> Option<f64> {
    if !f.is_finite() || alpha * f >= 1.0 {
        return None;
    }
    if f == 0.0 {
        return Some(0.0);
    }
    let mut h = f * f.abs().ln();
    if alpha != 0.0 {
        let x = -alpha * f;
        h += (1.0 + x) * x.ln_1p() / alpha;
    }
    Some(h)
}

fn lp(f: &[f64], dv: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    (dv * f.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

pub fn relaxation_error(f: &[f64], f_inf: &[f64], dv: f64) -> f64 {
    dv * f.iter().zip(f_inf).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `max_j |Q_j|`.
pub fn linf_residual(q: &[f64]) -> f64 {
    q.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Moments from rescaled values: `ρ = Δξ μ Σ G`, `ρu = Δξ μ Σ v G`, and so on.
pub fn moments(grid: &GridSpec, frame: &Frame, g: &[f64]) -> Moments {
    let w = grid.cell_volume() * frame.mu;
    let d = grid.dim;
    let mut rho = 0.0;
    let mut p = [0.0; 3];
    let mut ec = 0.0;
    for (j, &gj) in g.iter().enumerate() {
        let v = frame.velocity(grid, j);
        rho += gj;
        for a in 0..d {
            p[a] += v[a] * gj;
            ec += v[a] * v[a] * gj;
        }
    }
    rho *= w;
    ec *= w;
    let u = if rho != 0.0 { p.map(|x| x * w / rho) } else { [0.0; 3] };
    let mut e2 = 0.0;
    for (j, &gj) in g.iter().enumerate() {
        let v = frame.velocity(grid, j);
        e2 += (0..d).map(|a| (v[a] - u[a]).powi(2)).sum::<f64>() * gj;
    }
    let e = if rho != 0.0 { e2 * w / (2.0 * rho) } else { 0.0 };
    Moments { rho, u, ec, e }
}

/// Entropy from rescaled values with `f = μ s^d G` substituted inside the
/// logarithms.
pub fn entropy(grid: &GridSpec, frame: &Frame, g: &[f64], alpha: f64) -> Entropy {
    let k = frame.density_factor();
    let mut h = 0.0;
    let mut negative = 0;
    for (j, &gj) in g.iter().enumerate() {
        let f = k * gj;
        if !f.is_finite() || alpha * f >= 1.0 {
            return Entropy::Undefined { node: j };
        }
        negative += usize::from(f < 0.0);
        if gj == 0.0 {
            continue;
        }
        h += gj * f.abs().ln();
        if alpha != 0.0 {
            h += (1.0 / k - alpha * gj) / alpha * (-alpha * f).ln_1p();
        }
    }
    Entropy::Defined { value: h * grid.cell_volume() * frame.mu, negative }
}

/// `ℓ^p` norm from rescaled values, `(Δξ μ^p s^{d(p−1)} Σ |G|^p)^{1/p}`.
pub fn lp_norm(grid: &GridSpec, frame: &Frame, g: &[f64], p: f64) -> f64 {
    let k = frame.density_factor();
    if p.is_infinite() {
        return k * linf_residual(g);
    }
    let s_d = frame.scale().powi(grid.dim as i32);
    let w = grid.cell_volume() * frame.mu.powf(p) * s_d.powf(p - 1.0);
    (w * g.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}
