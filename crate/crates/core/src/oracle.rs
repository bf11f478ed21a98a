//! Literal direct sums over the Fourier modes, the reference for every fast
//! collision path. Cost is `O(n^{3d})`; small grids only.

use rustfft::num_complex::Complex64;

use crate::error::CollisionError;
use crate::grid::{GridSpec, Transform};
use crate::kernel::KernelTable;

/// Largest `n` accepted by the oracle in 2D and 3D.
pub const MAX_N_2D: usize = 16;
pub const MAX_N_3D: usize = 8;

/// Dense `β` matrix and index arithmetic for one table.
#[derive(Debug, Clone)]
pub struct DirectOracle {
    grid: GridSpec,
    len: usize,
    beta: Vec<f64>,
    sum: Vec<usize>,
}

impl DirectOracle {
    pub fn new(table: &KernelTable) -> Result<Self, CollisionError> {
        let grid = table.grid.clone();
        let limit = if grid.dim == 2 { MAX_N_2D } else { MAX_N_3D };
        if grid.n > limit {
            return Err(CollisionError::OracleTooLarge { dim: grid.dim, n: grid.n });
        }
        let len = grid.len();
        let mut beta = vec![0.0; len * len];
        let mut sum = vec![0; len * len];
        for k in 0..len {
            for l in 0..len {
                beta[k * len + l] = table.beta(k, l);
                sum[k * len + l] = grid.add(k, l);
            }
        }
        Ok(Self { grid, len, beta, sum })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    fn b(&self, k: usize, l: usize) -> f64 {
        self.beta[k * self.len + l]
    }

    #[inline]
    fn add(&self, k: usize, l: usize) -> usize {
        self.sum[k * self.len + l]
    }

    /// `Σ_{k+l=n} β(k,l) F̂_k Ĝ_l`.
    pub fn q1c(&self, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len];
        for k in 0..self.len {
            for l in 0..self.len {
                out[self.add(k, l)] += self.b(k, l) * f[k] * g[l];
            }
        }
        out
    }

    /// `Σ_{k+l=n} β(l,l) F̂_k Ĝ_l`.
    pub fn q2c(&self, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len];
        for k in 0..self.len {
            for l in 0..self.len {
                out[self.add(k, l)] += self.b(l, l) * f[k] * g[l];
            }
        }
        out
    }

    fn triple<W: Fn(usize, usize, usize) -> f64>(
        &self,
        f: &[Complex64],
        g: &[Complex64],
        h: &[Complex64],
        weight: W,
    ) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len];
        for k in 0..self.len {
            for l in 0..self.len {
                let fg = f[k] * g[l];
                let kl = self.add(k, l);
                for m in 0..self.len {
                    out[self.add(kl, m)] += weight(k, l, m) * fg * h[m];
                }
            }
        }
        out
    }

    /// `Σ_{k+l+m=n} β(k+m, l+m) F̂_k Ĝ_l Ĥ_m`.
    pub fn q1q(&self, f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        self.triple(f, g, h, |k, l, m| self.b(self.add(k, m), self.add(l, m)))
    }

    /// `Σ_{k+l+m=n} β(l, m) F̂_k Ĝ_l Ĥ_m`, i.e. `F ⊙ Q1c(G,H)`.
    pub fn q2q(&self, f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        self.triple(f, g, h, |_, l, m| self.b(l, m))
    }

    /// `Σ_{k+l+m=n} β(l+m, l) F̂_k Ĝ_l Ĥ_m`.
    pub fn q3q(&self, f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        self.triple(f, g, h, |_, l, m| self.b(self.add(l, m), l))
    }

    /// `Σ_{k+l+m=n} β(l, l+m) F̂_k Ĝ_l Ĥ_m`.
    pub fn q4q(&self, f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        self.triple(f, g, h, |_, l, m| self.b(l, self.add(l, m)))
    }

    /// Fourier coefficients of `Q_α(G)`.
    pub fn full(&self, g: &[Complex64], alpha_eff: f64) -> Vec<Complex64> {
        let mut out = self.q1c(g, g);
        for (o, v) in out.iter_mut().zip(self.q2c(g, g)) {
            *o -= v;
        }
        if alpha_eff != 0.0 {
            let q1 = self.q1q(g, g, g);
            let q2 = self.q2q(g, g, g);
            let q3 = self.q3q(g, g, g);
            let q4 = self.q4q(g, g, g);
            for i in 0..self.len {
                out[i] -= alpha_eff * (q1[i] + q2[i] - q3[i] - q4[i]);
            }
        }
        out
    }
}

/// Physical values of `Q_α(G)` from the direct sums.
pub fn direct_q_oracle(table: &KernelTable, g: &[f64], alpha_eff: f64) -> Result<Vec<f64>, CollisionError> {
    let oracle = DirectOracle::new(table)?;
    if g.len() != table.grid.len() {
        return Err(CollisionError::Shape { expected: table.grid.len(), got: g.len() });
    }
    let tr = Transform::new(&table.grid);
    let gh = tr.forward(g);
    Ok(tr.inverse_real(&oracle.full(&gh, alpha_eff)))
}
