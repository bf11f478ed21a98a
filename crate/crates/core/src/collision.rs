//! Fast evaluation of the truncated Boltzmann–Nordheim collision operator
//!
//! ```text
//! Q_α(G) = Q1c(G,G) − Q2c(G,G) − α (Q1q + Q2q − Q3q − Q4q)(G,G,G)
//! ```
//!
//! on the periodic grid, with every piece expressed through the kernel modes
//! `β(k,l) = C Σ_p α_p(k) α'_p(l)` and circular convolutions over `I_N`.
//! All operators take and return physical (real) grid values; indices of `β`
//! are reduced mod `n`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::CollisionError;
use crate::grid::{FftScratch, GridSpec, Transform};
use crate::kernel::KernelTable;

/// Default bound on `sup|G|` beyond which evaluation reports blow-up.
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e6;

/// Shifts handled per private accumulator in [`CollisionOperator::q1q`].
/// Fixed independently of the thread count so that the reduction order, and
/// hence the rounding, is reproducible.
const SHIFT_CHUNK: usize = 64;

/// Collision operator bound to one kernel table.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    table: KernelTable,
    tr: Transform,
    /// `a_p(s) = Σ_k α_p(k) e^{2iπ k·s/n}` stored as `[s][p]`.
    a_by_shift: Vec<Vec<f64>>,
    neg: Vec<usize>,
    pub blowup_bound: f64,
}

impl CollisionOperator {
    pub fn new(table: KernelTable) -> Self {
        let tr = Transform::new(&table.grid);
        let grid = &table.grid;
        let len = grid.len();
        let mut work = FftScratch::default();
        let a_phys: Vec<Vec<f64>> = table
            .alpha
            .iter()
            .map(|alpha| {
                let mut buf: Vec<Complex64> =
                    alpha.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                tr.inverse_in_place(&mut buf, &mut work);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let a_by_shift = (0..len).map(|s| a_phys.iter().map(|a| a[s]).collect()).collect();
        let neg = (0..len).map(|k| grid.negate(k)).collect();
        Self {
            table,
            tr,
            a_by_shift,
            neg,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        }
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn grid(&self) -> &GridSpec {
        &self.table.grid
    }

    pub fn transform(&self) -> &Transform {
        &self.tr
    }

    fn check(&self, fields: &[&[f64]]) -> Result<(), CollisionError> {
        let expected = self.grid().len();
        for f in fields {
            if f.len() != expected {
                return Err(CollisionError::Shape { expected, got: f.len() });
            }
        }
        Ok(())
    }

    /// Inverse transforms of `α_p ⊙ X̂` (real part) and `α'_p ⊙ Ŷ` (imaginary
    /// part) for one `p`, packed in one complex transform.
    fn modal_pair(&self, p: usize, x: &[Complex64], y: &[Complex64], work: &mut FftScratch) -> Vec<Complex64> {
        let a = &self.table.alpha[p];
        let ap = &self.table.alpha_prime[p];
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = (0..x.len()).map(|k| x[k] * a[k] + i * (y[k] * ap[k])).collect();
        self.tr.inverse_in_place(&mut buf, work);
        buf
    }

    /// Gain term `Q1c(F,G) = C Σ_p (α_p⊙F̂) ∗ (α'_p⊙Ĝ)` in physical space.
    pub fn q1c(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.check(&[f, g])?;
        let fh = self.tr.forward(f);
        let gh = self.tr.forward(g);
        Ok(self.q1c_hat(&fh, &gh))
    }

    fn q1c_hat(&self, fh: &[Complex64], gh: &[Complex64]) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = (0..self.table.count_p())
            .into_par_iter()
            .map_init(FftScratch::default, |work, p| {
                self.modal_pair(p, fh, gh, work).iter().map(|z| z.re * z.im).collect()
            })
            .collect();
        let c = self.table.weight_c;
        sum_in_order(parts, self.grid().len()).into_iter().map(|v| c * v).collect()
    }

    /// Loss term `Q2c(F,G) = F ⊙ inverse(β(l,l) Ĝ_l)`.
    pub fn q2c(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.check(&[f, g])?;
        let gh = self.tr.forward(g);
        let l = self.diag_loss(&gh);
        Ok(f.iter().zip(&l).map(|(a, b)| a * b).collect())
    }

    fn diag_loss(&self, gh: &[Complex64]) -> Vec<f64> {
        let buf: Vec<Complex64> = gh.iter().zip(&self.table.beta_diag).map(|(z, b)| z * b).collect();
        self.tr.inverse_real(&buf)
    }

    /// `Q2q(F,G,H) = F ⊙ Q1c(G,H)`.
    pub fn q2q(&self, f: &[f64], g: &[f64], h: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.check(&[f])?;
        let gain = self.q1c(g, h)?;
        Ok(f.iter().zip(&gain).map(|(a, b)| a * b).collect())
    }

    /// `Q3q(F,G,H) = F ⊙ inverse(T̂)`, `T̂_s = C Σ_p α_p(s) [(α'_p⊙Ĝ) ∗ Ĥ]_s`.
    pub fn q3q(&self, f: &[f64], g: &[f64], h: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.loss_modal(f, g, h, false)
    }

    /// `Q4q(F,G,H) = F ⊙ inverse(Û)`, `Û_s = C Σ_p α'_p(s) [(α_p⊙Ĝ) ∗ Ĥ]_s`.
    pub fn q4q(&self, f: &[f64], g: &[f64], h: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.loss_modal(f, g, h, true)
    }

    fn loss_modal(&self, f: &[f64], g: &[f64], h: &[f64], mirror: bool) -> Result<Vec<f64>, CollisionError> {
        self.check(&[f, g, h])?;
        let gh = self.tr.forward(g);
        let len = gh.len();
        let parts: Vec<Vec<f64>> = (0..self.table.count_p())
            .into_par_iter()
            .map_init(FftScratch::default, |work, p| {
                let (inner, outer) = if mirror {
                    (&self.table.alpha[p], &self.table.alpha_prime[p])
                } else {
                    (&self.table.alpha_prime[p], &self.table.alpha[p])
                };
                let mut buf: Vec<Complex64> = (0..len).map(|k| gh[k] * inner[k]).collect();
                self.tr.inverse_in_place(&mut buf, work);
                for (z, hv) in buf.iter_mut().zip(h) {
                    *z = Complex64::new(z.re * hv, 0.0);
                }
                self.tr.forward_in_place(&mut buf, work);
                for (z, o) in buf.iter_mut().zip(outer) {
                    *z *= o;
                }
                self.tr.inverse_in_place(&mut buf, work);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let c = self.table.weight_c;
        let t = sum_in_order(parts, len);
        Ok(f.iter().zip(&t).map(|(a, b)| c * a * b).collect())
    }

    fn guard(&self, g: &[f64]) -> Result<(), CollisionError> {
        let mut sup: f64 = 0.0;
        for &v in g {
            if !v.is_finite() {
                return Err(CollisionError::BlowUp { sup_norm: f64::INFINITY, threshold: self.blowup_bound });
            }
            sup = sup.max(v.abs());
        }
        if sup > self.blowup_bound {
            return Err(CollisionError::BlowUp { sup_norm: sup, threshold: self.blowup_bound });
        }
        Ok(())
    }

    /// Trilinear gain `Q1q(G,G,G)`, the term with Fourier symbol
    /// `Σ_{k+l+m=n} β(k+m, l+m) Ĝ_k Ĝ_l Ĝ_m`.
    ///
    /// In physical space
    /// `Q1q_j = C n^{-2d} Σ_p Σ_{z,y} a_p(z) a'_p(y) G_{j+z} G_{j+y} G_{j+z+y}`
    /// with `a_p`, `a'_p` the inverse transforms of the modes. For each shift
    /// `z` the `y`-sum is a circular convolution of `a'_p` with
    /// `W_z = G ⊙ G(·+z)`, and by linearity the `p`-sum collapses onto one
    /// multiplier `K_z = Σ_p a_p(z) α'_p`. Each shift therefore costs one
    /// forward and one inverse transform (two shifts share a complex
    /// transform since `W_z` is real) plus `O(P n^d)` multiply-adds.
    pub fn q1q(&self, g: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.check(&[g])?;
        self.guard(g)?;
        Ok(self.q1q_unchecked(g))
    }

    fn q1q_unchecked(&self, g: &[f64]) -> Vec<f64> {
        let grid = self.grid();
        let len = grid.len();
        let starts: Vec<usize> = (0..len).step_by(SHIFT_CHUNK).collect();
        let parts: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&start| {
                let end = (start + SHIFT_CHUNK).min(len);
                let mut acc = vec![0.0; len];
                let mut work = FftScratch::default();
                let mut g1 = vec![0.0; len];
                let mut g2 = vec![0.0; len];
                let mut k1 = vec![0.0; len];
                let mut k2 = vec![0.0; len];
                let mut z = vec![Complex64::default(); len];
                let mut u = vec![Complex64::default(); len];
                let mut s = start;
                while s < end {
                    let pair = s + 1 < end;
                    roll(grid, g, s, &mut g1);
                    if pair {
                        roll(grid, g, s + 1, &mut g2);
                    } else {
                        g2.iter_mut().for_each(|v| *v = 0.0);
                    }
                    for i in 0..len {
                        z[i] = Complex64::new(g[i] * g1[i], g[i] * g2[i]);
                    }
                    self.tr.forward_unscaled_in_place(&mut z, &mut work);
                    self.shift_multiplier(s, &mut k1);
                    if pair {
                        self.shift_multiplier(s + 1, &mut k2);
                    } else {
                        k2.iter_mut().for_each(|v| *v = 0.0);
                    }
                    for k in 0..len {
                        let zc = z[self.neg[k]].conj();
                        u[k] = 0.5 * ((k1[k] + k2[k]) * z[k] + (k1[k] - k2[k]) * zc);
                    }
                    self.tr.inverse_in_place(&mut u, &mut work);
                    for i in 0..len {
                        acc[i] += g1[i] * u[i].re + g2[i] * u[i].im;
                    }
                    s += 2;
                }
                acc
            })
            .collect();
        let scale = self.table.weight_c / (len as f64 * len as f64);
        tree_sum(parts, len).into_iter().map(|v| v * scale).collect()
    }

    /// `K_s = Σ_p a_p(s) α'_p`.
    fn shift_multiplier(&self, s: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (ap, &w) in self.table.alpha_prime.iter().zip(&self.a_by_shift[s]) {
            for (o, &x) in out.iter_mut().zip(ap) {
                *o += w * x;
            }
        }
    }

    /// Trilinear gain evaluated shift by shift in Fourier space:
    /// `Q̂_n = C n^{-d} Σ_p Σ_j G_j e^{2iπ n·j/n} Φ_{p,j}(n) Ψ_{p,j}(n)` with
    /// `Φ_{p,j} = forward(a_p(·−j) ⊙ G)` and `Ψ_{p,j} = forward(a'_p(·−j) ⊙ G)`.
    ///
    /// Costs `P n^d` transforms; kept as an independent check of [`Self::q1q`].
    pub fn q1q_shiftwise(&self, g: &[f64]) -> Result<Vec<f64>, CollisionError> {
        self.check(&[g])?;
        self.guard(g)?;
        let grid = self.grid();
        let len = grid.len();
        let n = grid.n;
        let mut work = FftScratch::default();
        let to_phys = |modes: &Vec<f64>, work: &mut FftScratch| -> Vec<f64> {
            let mut buf: Vec<Complex64> = modes.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.tr.inverse_in_place(&mut buf, work);
            buf.into_iter().map(|z| z.re).collect()
        };
        let roots: Vec<Complex64> = (0..n)
            .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / n as f64))
            .collect();
        let idx: Vec<[i64; 3]> = (0..len).map(|f| grid.multi_index(f)).collect();
        let mut qhat = vec![Complex64::default(); len];
        let mut sa = vec![0.0; len];
        let mut sb = vec![0.0; len];
        let mut buf = vec![Complex64::default(); len];
        for p in 0..self.table.count_p() {
            let a = to_phys(&self.table.alpha[p], &mut work);
            let ap = to_phys(&self.table.alpha_prime[p], &mut work);
            for j in 0..len {
                let mj = grid.negate(j);
                roll(grid, &a, mj, &mut sa);
                roll(grid, &ap, mj, &mut sb);
                for i in 0..len {
                    buf[i] = Complex64::new(sa[i] * g[i], sb[i] * g[i]);
                }
                self.tr.forward_in_place(&mut buf, &mut work);
                let jm = idx[j];
                for k in 0..len {
                    let zc = buf[self.neg[k]].conj();
                    let phi = 0.5 * (buf[k] + zc);
                    let psi = Complex64::new(0.0, -0.5) * (buf[k] - zc);
                    let km = idx[k];
                    let t = (km[0] * jm[0] + km[1] * jm[1] + km[2] * jm[2]).rem_euclid(n as i64);
                    qhat[k] += g[j] * roots[t as usize] * phi * psi;
                }
            }
        }
        let scale = self.table.weight_c / len as f64;
        for v in qhat.iter_mut() {
            *v *= scale;
        }
        Ok(self.tr.inverse_real(&qhat))
    }

    /// `Q_α(G)` scaled by `c_pre`:
    /// `c_pre (Q1c − Q2c − α_eff (Q1q + Q2q − Q3q − Q4q))` with `F = G = H`.
    /// The trilinear part is skipped when `α_eff = 0`.
    pub fn assemble(&self, g: &[f64], alpha_eff: f64, c_pre: f64) -> Result<Vec<f64>, CollisionError> {
        self.check(&[g])?;
        self.guard(g)?;
        let len = g.len();
        let gh = self.tr.forward(g);
        let quantum = alpha_eff != 0.0;
        // Per p: gain u⊙v, and for the quantum losses the transform of
        // (v⊙G) + i(u⊙G) weighted by α_p and α'_p respectively.
        let parts: Vec<(Vec<f64>, Vec<Complex64>)> = (0..self.table.count_p())
            .into_par_iter()
            .map_init(FftScratch::default, |work, p| {
                let uv = self.modal_pair(p, &gh, &gh, work);
                let gain: Vec<f64> = uv.iter().map(|z| z.re * z.im).collect();
                if !quantum {
                    return (gain, Vec::new());
                }
                let mut w: Vec<Complex64> =
                    uv.iter().zip(g).map(|(z, gv)| Complex64::new(z.im * gv, z.re * gv)).collect();
                self.tr.forward_in_place(&mut w, work);
                let a = &self.table.alpha[p];
                let ap = &self.table.alpha_prime[p];
                let t: Vec<Complex64> = (0..len)
                    .map(|k| {
                        let zc = w[self.neg[k]].conj();
                        let w3 = 0.5 * (w[k] + zc);
                        let w4 = Complex64::new(0.0, -0.5) * (w[k] - zc);
                        a[k] * w3 + ap[k] * w4
                    })
                    .collect();
                (gain, t)
            })
            .collect();
        let c = self.table.weight_c;
        let mut gains = Vec::with_capacity(parts.len());
        let mut tsum = if quantum { vec![Complex64::default(); len] } else { Vec::new() };
        for (gain, t) in parts {
            gains.push(gain);
            for (acc, v) in tsum.iter_mut().zip(t) {
                *acc += v;
            }
        }
        let gain: Vec<f64> = sum_in_order(gains, len).into_iter().map(|v| c * v).collect();
        let loss = self.diag_loss(&gh);
        let mut out: Vec<f64> = (0..len).map(|i| gain[i] - g[i] * loss[i]).collect();
        if quantum {
            let t = self.tr.inverse_real(&tsum);
            let q1q = self.q1q_unchecked(g);
            for i in 0..len {
                let tri = q1q[i] + g[i] * gain[i] - c * g[i] * t[i];
                out[i] -= alpha_eff * tri;
            }
        }
        for v in out.iter_mut() {
            *v *= c_pre;
        }
        Ok(out)
    }
}

/// `dst[i] = src[i + s]` with indices added componentwise mod n.
pub fn roll(grid: &GridSpec, src: &[f64], s: usize, dst: &mut [f64]) {
    let n = grid.n;
    let d = grid.dim;
    let rows = grid.len() / n;
    let s_last = s % n;
    let s_rows = s / n;
    // Shift of the row multi-index (all axes but the last).
    let mut shift = [0usize; 2];
    let mut rest = s_rows;
    for a in (0..d - 1).rev() {
        shift[a] = rest % n;
        rest /= n;
    }
    for r in 0..rows {
        let src_row = if d == 2 {
            (r + shift[0]) % n
        } else {
            let (r0, r1) = (r / n, r % n);
            ((r0 + shift[0]) % n) * n + (r1 + shift[1]) % n
        };
        let out = &mut dst[r * n..(r + 1) * n];
        let inp = &src[src_row * n..(src_row + 1) * n];
        out[..n - s_last].copy_from_slice(&inp[s_last..]);
        out[n - s_last..].copy_from_slice(&inp[..s_last]);
    }
}

/// Sum vectors left to right.
fn sum_in_order(parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
    out
}

/// Pairwise sum in a fixed binary-tree order.
fn tree_sum(mut parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    if parts.is_empty() {
        return vec![0.0; len];
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity((parts.len() + 1) / 2);
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}
