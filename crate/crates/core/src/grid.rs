//! Periodic velocity grid and its discrete Fourier transform.
//!
//! Fields are stored as flat row-major arrays of length `n^d`. Along every
//! axis the storage index `i ∈ 0..n` maps to the signed index
//! `j = i` for `i < n/2` and `j = i - n` otherwise, so that physical samples
//! and Fourier coefficients share one layout and `e^{2iπ k·j/n}` can be
//! evaluated on either signed or storage indices.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::GridError;

/// Geometry of the computational grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    /// Velocity box is `[-L, L]^d` in the classical frame.
    pub half_width_l: f64,
    /// Ratio `R / S` used at construction.
    pub trunc_ratio: f64,
    /// Support radius `S` in ξ-units.
    pub support_s: f64,
    /// Truncation radius `R` in ξ-units.
    pub trunc_r: f64,
    /// `false` when `n` is not a power of two (allowed, but slower transforms).
    pub pow2: bool,
}

/// Build a grid satisfying the anti-aliasing condition
/// `S = 2π / (2λ + 1 + √2)` with `R = λ S`.
pub fn build_grid(
    dim: usize,
    n: usize,
    half_width_l: f64,
    trunc_ratio: f64,
) -> Result<GridSpec, GridError> {
    if dim != 2 && dim != 3 {
        return Err(GridError::Dimension(dim));
    }
    if n < 4 || n % 2 != 0 {
        return Err(GridError::PointCount(n));
    }
    if !(half_width_l > 0.0) || !half_width_l.is_finite() {
        return Err(GridError::HalfWidth(half_width_l));
    }
    if !(trunc_ratio >= 1.0) || !trunc_ratio.is_finite() {
        return Err(GridError::TruncRatio(trunc_ratio));
    }
    let support_s = 2.0 * PI / (2.0 * trunc_ratio + 1.0 + 2f64.sqrt());
    Ok(GridSpec {
        dim,
        n,
        half_width_l,
        trunc_ratio,
        support_s,
        trunc_r: trunc_ratio * support_s,
        pow2: n.is_power_of_two(),
    })
}

impl GridSpec {
    /// Number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed index along one axis for a storage index.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index along one axis for any integer (reduced mod n).
    #[inline]
    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }

    /// Signed multi-index of a flat storage index; unused axes are zero.
    pub fn multi_index(&self, flat: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.signed(rest % self.n);
            rest /= self.n;
        }
        out
    }

    /// Flat storage index of a multi-index, each component reduced mod n.
    pub fn flat_index(&self, j: &[i64]) -> usize {
        let mut flat = 0;
        for &ja in &j[..self.dim] {
            flat = flat * self.n + self.wrap(ja);
        }
        flat
    }

    /// Flat index of `-j` (mod n).
    pub fn negate(&self, flat: usize) -> usize {
        let j = self.multi_index(flat);
        self.flat_index(&[-j[0], -j[1], -j[2]])
    }

    /// Flat index of `j + s` (mod n) for two flat indices.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let ja = self.multi_index(a);
        let jb = self.multi_index(b);
        self.flat_index(&[ja[0] + jb[0], ja[1] + jb[1], ja[2] + jb[2]])
    }

    /// Node `ξ_j = 2πj/n` of a flat storage index.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let j = self.multi_index(flat);
        let h = 2.0 * PI / self.n as f64;
        [j[0] as f64 * h, j[1] as f64 * h, j[2] as f64 * h]
    }

    /// Cell volume in ξ-units, `(2π/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.n as f64).powi(self.dim as i32)
    }

    /// Storage order that lists points with signed indices increasing
    /// lexicographically (axis 0 slowest).
    pub fn sorted_order(&self) -> Vec<usize> {
        let n = self.n;
        let axis: Vec<usize> = (n / 2..n).chain(0..n / 2).collect();
        let mut out = Vec::with_capacity(self.len());
        match self.dim {
            2 => {
                for &a in &axis {
                    for &b in &axis {
                        out.push(a * n + b);
                    }
                }
            }
            _ => {
                for &a in &axis {
                    for &b in &axis {
                        for &c in &axis {
                            out.push((a * n + b) * n + c);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Reusable buffers for one thread of transform work.
#[derive(Debug, Default)]
pub struct FftScratch {
    lines: Vec<Complex64>,
    inner: Vec<Complex64>,
}

/// Multi-dimensional DFT on a [`GridSpec`].
///
/// `forward` computes `Ĝ_k = n^{-d} Σ_j G_j e^{-2iπ k·j/n}` and `inverse` is
/// its exact inverse `G_j = Σ_k Ĝ_k e^{2iπ k·j/n}`.
#[derive(Clone)]
pub struct Transform {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scratch(&self) -> FftScratch {
        FftScratch::default()
    }

    /// Unnormalised transform in place along every axis.
    fn raw(&self, data: &mut [Complex64], forward: bool, work: &mut FftScratch) {
        let n = self.grid.n;
        let d = self.grid.dim;
        let total = self.grid.len();
        assert_eq!(data.len(), total, "field length does not match grid");
        let plan = if forward { &self.fwd } else { &self.inv };
        let need = plan.get_inplace_scratch_len();
        if work.inner.len() < need {
            work.inner.resize(need, Complex64::default());
        }
        if work.lines.len() < total {
            work.lines.resize(total, Complex64::default());
        }
        // Last axis is contiguous.
        plan.process_with_scratch(data, &mut work.inner[..need]);
        for axis in 0..d - 1 {
            let stride = n.pow((d - 1 - axis) as u32);
            let outer = total / (n * stride);
            let lines = &mut work.lines[..total];
            for o in 0..outer {
                let base = o * n * stride;
                for k in 0..n {
                    let src = &data[base + k * stride..base + (k + 1) * stride];
                    for (s, v) in src.iter().enumerate() {
                        lines[(o * stride + s) * n + k] = *v;
                    }
                }
            }
            plan.process_with_scratch(lines, &mut work.inner[..need]);
            for o in 0..outer {
                let base = o * n * stride;
                for k in 0..n {
                    let dst = &mut data[base + k * stride..base + (k + 1) * stride];
                    for (s, v) in dst.iter_mut().enumerate() {
                        *v = lines[(o * stride + s) * n + k];
                    }
                }
            }
        }
    }

    /// Normalised forward transform in place.
    pub fn forward_in_place(&self, data: &mut [Complex64], work: &mut FftScratch) {
        self.raw(data, true, work);
        let scale = 1.0 / self.grid.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Inverse transform in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64], work: &mut FftScratch) {
        self.raw(data, false, work);
    }

    /// Unnormalised forward transform `Σ_j G_j e^{-2iπ k·j/n}` in place.
    pub fn forward_unscaled_in_place(&self, data: &mut [Complex64], work: &mut FftScratch) {
        self.raw(data, true, work);
    }

    /// Fourier coefficients of a real field.
    pub fn forward(&self, phys: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = phys.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf, &mut FftScratch::default());
        buf
    }

    /// Physical values from Fourier coefficients (complex in general).
    pub fn inverse(&self, coef: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coef.to_vec();
        self.inverse_in_place(&mut buf, &mut FftScratch::default());
        buf
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&self, coef: &[Complex64]) -> Vec<f64> {
        self.inverse(coef).into_iter().map(|z| z.re).collect()
    }

    /// Coefficients of `∂G/∂ξ_axis`, i.e. `i k_axis Ĝ_k`.
    ///
    /// For a real field the unpaired mode `k_axis = -n/2` contributes a purely
    /// imaginary part, which [`Transform::inverse_real`] discards.
    pub fn fourier_derivative(&self, coef: &[Complex64], axis: usize) -> Vec<Complex64> {
        assert!(axis < self.grid.dim);
        coef.iter()
            .enumerate()
            .map(|(flat, &c)| c * Complex64::new(0.0, self.grid.multi_index(flat)[axis] as f64))
            .collect()
    }

    /// Relative defect of Parseval's identity
    /// `n^{-d} Σ_j |G_j|² = Σ_k |Ĝ_k|²`.
    pub fn parseval_defect(&self, phys: &[f64], coef: &[Complex64]) -> f64 {
        let lhs = phys.iter().map(|x| x * x).sum::<f64>() / self.grid.len() as f64;
        let rhs = coef.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if lhs == 0.0 && rhs == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / lhs.max(rhs)
        }
    }
}

/// Which representation of a [`SpectralField`] holds the current data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Current {
    Phys,
    Coef,
    Both,
}

/// A real grid function together with its Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub phys: Vec<f64>,
    pub coef: Vec<Complex64>,
    pub current: Current,
}

impl SpectralField {
    pub fn from_phys(phys: Vec<f64>) -> Self {
        let len = phys.len();
        Self {
            phys,
            coef: vec![Complex64::default(); len],
            current: Current::Phys,
        }
    }

    pub fn from_coef(coef: Vec<Complex64>) -> Self {
        let len = coef.len();
        Self {
            phys: vec![0.0; len],
            coef,
            current: Current::Coef,
        }
    }

    /// Make the coefficients current.
    pub fn forward(&mut self, tr: &Transform) {
        if self.current == Current::Phys {
            self.coef = tr.forward(&self.phys);
            self.current = Current::Both;
        }
    }

    /// Make the physical values current (real part kept).
    pub fn inverse(&mut self, tr: &Transform) {
        if self.current == Current::Coef {
            self.phys = tr.inverse_real(&self.coef);
            self.current = Current::Both;
        }
    }

    /// Mark the physical values as modified.
    pub fn phys_mut(&mut self) -> &mut [f64] {
        self.current = Current::Phys;
        &mut self.phys
    }
}
