//! Kernel modes `β(k,l) ≈ C Σ_p α_p(k) α'_p(l)` of the truncated collision
//! operator.
//!
//! In 2D the angular integral over the circle is replaced by the rectangle
//! rule on `θ_p = pπ/M`; in 3D by the product rule on
//! `(θ_p, φ_q) = (pπ/M₁, qπ/M₂)`. Tables store the modes at the signed
//! wavenumbers of the grid in storage order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::KernelError;
use crate::grid::GridSpec;
use crate::quadrature::gauss_legendre_on;

/// Family of the collision kernel a table was built for.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// 2D Maxwellian molecules, `B̃ = 2C_Φ`.
    Maxwell2d,
    /// 2D Maxwellian molecules with the halved angular rule for `a = b`.
    Maxwell2dSymmetric,
    /// 3D hard spheres, `B̃ = 4C_Φ`.
    HardSphere3d,
    /// Separable kernel `a(|z|) b(|y|)` integrated numerically.
    Quadrature { label: String, order: usize },
}

impl KernelKind {
    pub fn id(&self) -> String {
        match self {
            KernelKind::Maxwell2d => "maxwell2d".into(),
            KernelKind::Maxwell2dSymmetric => "maxwell2d-sym".into(),
            KernelKind::HardSphere3d => "hardsphere3d".into(),
            KernelKind::Quadrature { label, order } => format!("quad-{label}-{order}"),
        }
    }
}

/// Precomputed kernel modes for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub grid: GridSpec,
    pub kind: KernelKind,
    /// `C` in `β = C Σ_p α_p α'_p`.
    pub weight_c: f64,
    /// `(M, 0)` in 2D, `(M₁, M₂)` in 3D.
    pub nodes: (usize, usize),
    /// Velocity exponent γ of the kernel and its constant `C_Φ`.
    pub gamma: f64,
    pub c_phi: f64,
    pub alpha: Vec<Vec<f64>>,
    pub alpha_prime: Vec<Vec<f64>>,
    /// `β(l,l)`, computed with [`KernelTable::beta`].
    pub beta_diag: Vec<f64>,
}

impl KernelTable {
    pub fn count_p(&self) -> usize {
        self.alpha.len()
    }

    /// `β(k,l)` from the stored modes at flat indices `k`, `l`.
    #[inline]
    pub fn beta(&self, k: usize, l: usize) -> f64 {
        let mut s = 0.0;
        for (a, ap) in self.alpha.iter().zip(&self.alpha_prime) {
            s += a[k] * ap[l];
        }
        self.weight_c * s
    }

    fn finish(
        grid: &GridSpec,
        kind: KernelKind,
        weight_c: f64,
        nodes: (usize, usize),
        gamma: f64,
        c_phi: f64,
        modes: Vec<(Vec<f64>, Vec<f64>)>,
    ) -> Self {
        let (mut alpha, mut alpha_prime): (Vec<_>, Vec<_>) = modes.into_iter().unzip();
        for mode in alpha.iter_mut().chain(alpha_prime.iter_mut()) {
            symmetrize_nyquist(grid, mode);
        }
        let mut table = KernelTable {
            grid: grid.clone(),
            kind,
            weight_c,
            nodes,
            gamma,
            c_phi,
            alpha,
            alpha_prime,
            beta_diag: Vec::new(),
        };
        table.beta_diag = (0..grid.len()).map(|l| table.beta(l, l)).collect();
        table
    }
}

/// On a periodic grid the wavenumber `-n/2` is its own negative, so a mode
/// sampled at signed indices is not even under `k ↦ -k (mod n)` on lines
/// through Nyquist components. Such entries are replaced by the average of the
/// two samples, which keeps the table even and transforms of real fields real.
fn symmetrize_nyquist(grid: &GridSpec, mode: &mut [f64]) {
    let half = -(grid.n as i64) / 2;
    for k in 0..mode.len() {
        let j = grid.multi_index(k);
        if j[..grid.dim].contains(&half) {
            let mk = grid.negate(k);
            if mk > k {
                let avg = 0.5 * (mode[k] + mode[mk]);
                mode[k] = avg;
                mode[mk] = avg;
            }
        }
    }
}

/// `sin(x)/x` with the removable singularity filled in by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `φ²_R(s) = ∫_{-R}^{R} e^{iρs} dρ = 2R Sinc(Rs)`.
pub fn phi2(r: f64, s: f64) -> f64 {
    2.0 * r * sinc(r * s)
}

/// `φ³_R(s) = ∫_{-R}^{R} |ρ| e^{iρs} dρ = R²(2 Sinc(Rs) - Sinc²(Rs/2))`.
pub fn phi3(r: f64, s: f64) -> f64 {
    let h = sinc(0.5 * r * s);
    r * r * (2.0 * sinc(r * s) - h * h)
}

/// `ψ³_R(s) = ∫_0^π sinθ' φ³_R(s cosθ') dθ' = 2R² Sinc²(Rs/2)`.
pub fn psi3(r: f64, s: f64) -> f64 {
    let h = sinc(0.5 * r * s);
    2.0 * r * r * h * h
}

fn dot(a: &[i64; 3], e: &[f64; 3]) -> f64 {
    a[0] as f64 * e[0] + a[1] as f64 * e[1] + a[2] as f64 * e[2]
}

/// Length of the component of `l` orthogonal to the unit vector `e`.
pub fn perp_norm(l: &[i64; 3], e: &[f64; 3]) -> f64 {
    let le = dot(l, e);
    let p = [
        l[0] as f64 - le * e[0],
        l[1] as f64 - le * e[1],
        l[2] as f64 - le * e[2],
    ];
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn unit2(theta: f64) -> [f64; 3] {
    [theta.cos(), theta.sin(), 0.0]
}

fn unit3(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn check_dim(grid: &GridSpec, dim: usize) -> Result<(), KernelError> {
    if grid.dim != dim {
        Err(KernelError::Dimension { expected: dim, got: grid.dim })
    } else {
        Ok(())
    }
}

fn wavenumbers(grid: &GridSpec) -> Vec<[i64; 3]> {
    (0..grid.len()).map(|f| grid.multi_index(f)).collect()
}

/// Closed-form 2D Maxwellian-molecule table on the angles `θ_p = pπ/M`.
pub fn build_maxwell2d(grid: &GridSpec, m: usize, c_phi: f64) -> Result<KernelTable, KernelError> {
    check_dim(grid, 2)?;
    if m == 0 {
        return Err(KernelError::NodeCount);
    }
    let modes = maxwell2d_modes(grid, c_phi, (0..m).map(|p| p as f64 * PI / m as f64).collect());
    Ok(KernelTable::finish(grid, KernelKind::Maxwell2d, PI / m as f64, (m, 0), 0.0, c_phi, modes))
}

/// 2D Maxwellian table on the half-range angles `θ_p = pπ/(2M)` with doubled
/// weight, intended for kernels with `a = b`.
pub fn build_maxwell2d_symmetric(
    grid: &GridSpec,
    m: usize,
    c_phi: f64,
) -> Result<KernelTable, KernelError> {
    check_dim(grid, 2)?;
    if m == 0 {
        return Err(KernelError::NodeCount);
    }
    let modes = maxwell2d_modes(grid, c_phi, (0..m).map(|p| p as f64 * PI / (2 * m) as f64).collect());
    Ok(KernelTable::finish(
        grid,
        KernelKind::Maxwell2dSymmetric,
        PI / m as f64,
        (m, 0),
        0.0,
        c_phi,
        modes,
    ))
}

fn maxwell2d_modes(grid: &GridSpec, c_phi: f64, thetas: Vec<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let r = grid.trunc_r;
    let ks = wavenumbers(grid);
    thetas
        .par_iter()
        .map(|&theta| {
            let e = unit2(theta);
            let e_perp = unit2(theta + 0.5 * PI);
            let a = ks.iter().map(|k| 2.0 * c_phi * phi2(r, dot(k, &e))).collect();
            let ap = ks.iter().map(|l| phi2(r, dot(l, &e_perp))).collect();
            (a, ap)
        })
        .collect()
}

/// Closed-form 3D hard-sphere table on `(θ_p, φ_q) = (pπ/M₁, qπ/M₂)`,
/// mode index `q + M₂ p`.
pub fn build_hardsphere3d(
    grid: &GridSpec,
    m1: usize,
    m2: usize,
    c_phi: f64,
) -> Result<KernelTable, KernelError> {
    check_dim(grid, 3)?;
    if m1 == 0 || m2 == 0 {
        return Err(KernelError::NodeCount);
    }
    let r = grid.trunc_r;
    let ks = wavenumbers(grid);
    let modes = (0..m1 * m2)
        .into_par_iter()
        .map(|idx| {
            let (p, q) = (idx / m2, idx % m2);
            let theta = p as f64 * PI / m1 as f64;
            let e = unit3(theta, q as f64 * PI / m2 as f64);
            let st = theta.sin();
            let a = ks.iter().map(|k| 4.0 * c_phi * st * phi3(r, dot(k, &e))).collect();
            let ap = ks.iter().map(|l| psi3(r, perp_norm(l, &e))).collect();
            (a, ap)
        })
        .collect();
    Ok(KernelTable::finish(
        grid,
        KernelKind::HardSphere3d,
        PI * PI / (m1 * m2) as f64,
        (m1, m2),
        1.0,
        c_phi,
        modes,
    ))
}

/// Radial profile of a separable kernel.
pub type Radial<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

/// Composite Gauss–Legendre rule on `[lo, hi]`: `order` nodes per panel and
/// enough panels to resolve `e^{iρ s}` for `|s| ≤ s_max`.
fn composite_rule(order: usize, lo: f64, hi: f64, s_max: f64) -> (Vec<f64>, Vec<f64>) {
    let phase = (hi - lo) * s_max;
    let panels = ((phase / (0.25 * order as f64)).ceil() as usize).max(1);
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for i in 0..panels {
        let (x, w) = gauss_legendre_on(order, lo + i as f64 * h, lo + (i + 1) as f64 * h);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// Samples of `w(|ρ|)` on a rule over `[-R, R]`, returned with the nodes.
struct RadialRule {
    rho: Vec<f64>,
    weight: Vec<f64>,
}

impl RadialRule {
    /// Panels are mirrored about `ρ = 0`, where `|ρ|`-weighted profiles kink.
    fn new(order: usize, r: f64, s_max: f64, profile: impl Fn(f64) -> f64) -> Self {
        let (x, w) = composite_rule(order, 0.0, r, s_max);
        let mut rho = Vec::with_capacity(2 * x.len());
        let mut weight = Vec::with_capacity(2 * x.len());
        for (&x, &w) in x.iter().zip(&w) {
            let v = w * profile(x);
            rho.extend([-x, x]);
            weight.extend([v, v]);
        }
        Self { rho, weight }
    }

    /// `(Re, Im)` of `Σ w_i e^{iρ_i s}`.
    fn fourier(&self, s: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&x, &w) in self.rho.iter().zip(&self.weight) {
            let (sn, cs) = (x * s).sin_cos();
            re += w * cs;
            im += w * sn;
        }
        (re, im)
    }

    /// `Σ w_i 2 Sinc(ρ_i s)`, the `θ'` integral of the Fourier transform
    /// taken in closed form.
    fn sinc_sum(&self, s: f64) -> f64 {
        self.rho.iter().zip(&self.weight).map(|(&x, &w)| 2.0 * w * sinc(x * s)).sum()
    }
}

/// Angular node counts for the quadrature path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularNodes {
    Plane(usize),
    Sphere(usize, usize),
}

/// Table for a separable kernel `B̃ = a(|z|) b(|y|)` with the one-dimensional
/// transforms evaluated by Gauss–Legendre quadrature of order `quad_order`
/// (per panel). In 3D `ψ_b(s) = ∫_0^π sinθ' φ_b(s cosθ') dθ'`, which matches
/// the hard-sphere closed form.
///
/// Fails when doubling the order moves any entry by more than `1e-8`.
pub fn build_vhs_quadrature(
    grid: &GridSpec,
    a_fn: Radial<'_>,
    b_fn: Radial<'_>,
    quad_order: usize,
    nodes: AngularNodes,
    label: &str,
) -> Result<KernelTable, KernelError> {
    if quad_order < 8 {
        return Err(KernelError::QuadOrder(quad_order));
    }
    let kind = KernelKind::Quadrature { label: label.to_string(), order: quad_order };
    let coarse = quadrature_modes(grid, a_fn, b_fn, quad_order, nodes)?;
    let fine = quadrature_modes(grid, a_fn, b_fn, 2 * quad_order, nodes)?;
    let mut change: f64 = 0.0;
    for ((ca, cap), (fa, fap)) in coarse.iter().zip(&fine) {
        for (x, y) in ca.iter().zip(fa).chain(cap.iter().zip(fap)) {
            change = change.max((x - y).abs());
        }
    }
    if change > 1e-8 {
        return Err(KernelError::NotConverged { change });
    }
    let (weight_c, m, gamma) = match nodes {
        AngularNodes::Plane(m) => (PI / m as f64, (m, 0), 0.0),
        AngularNodes::Sphere(m1, m2) => (PI * PI / (m1 * m2) as f64, (m1, m2), 1.0),
    };
    Ok(KernelTable::finish(grid, kind, weight_c, m, gamma, f64::NAN, coarse))
}

fn max_wavenumber(grid: &GridSpec) -> f64 {
    (grid.n as f64 / 2.0) * (grid.dim as f64).sqrt()
}

type Modes = Vec<(Vec<f64>, Vec<f64>)>;

fn quadrature_modes(
    grid: &GridSpec,
    a_fn: Radial<'_>,
    b_fn: Radial<'_>,
    order: usize,
    nodes: AngularNodes,
) -> Result<Modes, KernelError> {
    let r = grid.trunc_r;
    let ks = wavenumbers(grid);
    let s_max = max_wavenumber(grid);
    match nodes {
        AngularNodes::Plane(m) => {
            check_dim(grid, 2)?;
            if m == 0 {
                return Err(KernelError::NodeCount);
            }
            let ra = RadialRule::new(order, r, s_max, a_fn);
            let rb = RadialRule::new(order, r, s_max, b_fn);
            (0..m)
                .into_par_iter()
                .map(|p| {
                    let theta = p as f64 * PI / m as f64;
                    let e = unit2(theta);
                    let e_perp = unit2(theta + 0.5 * PI);
                    let mut a = Vec::with_capacity(ks.len());
                    let mut ap = Vec::with_capacity(ks.len());
                    for k in &ks {
                        let (re, im) = ra.fourier(dot(k, &e));
                        check_imag(im)?;
                        a.push(re);
                        let (re, im) = rb.fourier(dot(k, &e_perp));
                        check_imag(im)?;
                        ap.push(re);
                    }
                    Ok((a, ap))
                })
                .collect()
        }
        AngularNodes::Sphere(m1, m2) => {
            check_dim(grid, 3)?;
            if m1 == 0 || m2 == 0 {
                return Err(KernelError::NodeCount);
            }
            let ra = RadialRule::new(order, r, s_max, |x| a_fn(x) * x);
            let rb = RadialRule::new(order, r, s_max, |x| b_fn(x) * x);
            (0..m1 * m2)
                .into_par_iter()
                .map(|idx| {
                    let (p, q) = (idx / m2, idx % m2);
                    let theta = p as f64 * PI / m1 as f64;
                    let e = unit3(theta, q as f64 * PI / m2 as f64);
                    let st = theta.sin();
                    let mut a = Vec::with_capacity(ks.len());
                    let mut ap = Vec::with_capacity(ks.len());
                    for k in &ks {
                        let (re, im) = ra.fourier(dot(k, &e));
                        check_imag(im)?;
                        a.push(st * re);
                        ap.push(rb.sinc_sum(perp_norm(k, &e)));
                    }
                    Ok((a, ap))
                })
                .collect()
        }
    }
}

fn check_imag(im: f64) -> Result<(), KernelError> {
    if im.abs() > 1e-10 {
        Err(KernelError::ImaginaryPart(im))
    } else {
        Ok(())
    }
}

/// Direct evaluation of `β(k,l) = ∫_{B(0,R)²} a(|z|) b(|y|) δ(z·y) e^{i(z·k+y·l)} dz dy`
/// with Gauss–Legendre rules in every variable, independent of the
/// rectangle-rule decomposition.
///
/// 2D: `∫_0^π φ_a(k·e_θ) φ_b(l·e_{θ+π/2}) dθ`.
/// 3D: `∫_{[0,π]²} sinθ φ_a(k·e) ψ_b(|Π_{e⊥} l|) dθ dφ` with
/// `ψ_b(s) = ∫_0^π sinθ' φ_b(s cosθ') dθ'`, the same convention as the
/// hard-sphere closed form.
///
/// Fails when doubling the order moves the value by more than `1e-8`
/// relative.
pub fn beta_reference(
    grid: &GridSpec,
    a_fn: Radial<'_>,
    b_fn: Radial<'_>,
    k: [i64; 3],
    l: [i64; 3],
    quad_order: usize,
) -> Result<f64, KernelError> {
    if quad_order < 8 {
        return Err(KernelError::QuadOrder(quad_order));
    }
    let v1 = beta_reference_once(grid, a_fn, b_fn, k, l, quad_order);
    let v2 = beta_reference_once(grid, a_fn, b_fn, k, l, 2 * quad_order);
    let change = (v1 - v2).abs() / v2.abs().max(1e-300);
    if change > 1e-8 && (v1 - v2).abs() > 1e-12 {
        return Err(KernelError::NotConverged { change });
    }
    Ok(v2)
}

fn beta_reference_once(
    grid: &GridSpec,
    a_fn: Radial<'_>,
    b_fn: Radial<'_>,
    k: [i64; 3],
    l: [i64; 3],
    order: usize,
) -> f64 {
    let r = grid.trunc_r;
    let norm = |v: &[i64; 3]| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
    let s_max = norm(&k).max(norm(&l)).max(1.0);
    // Angular rules resolve oscillations of frequency ~R|k| in θ.
    let ang_max = r * s_max;
    if grid.dim == 2 {
        let ra = RadialRule::new(order, r, s_max, a_fn);
        let rb = RadialRule::new(order, r, s_max, b_fn);
        let (th, wt) = composite_rule(order, 0.0, PI, ang_max);
        th.iter()
            .zip(&wt)
            .map(|(&t, &w)| {
                let (fa, _) = ra.fourier(dot(&k, &unit2(t)));
                let (fb, _) = rb.fourier(dot(&l, &unit2(t + 0.5 * PI)));
                w * fa * fb
            })
            .sum()
    } else {
        let ra = RadialRule::new(order, r, s_max, |x| a_fn(x) * x);
        let rb = RadialRule::new(order, r, s_max, |x| b_fn(x) * x);
        let (th, wt) = composite_rule(order, 0.0, PI, ang_max);
        let (ph, wp) = composite_rule(order, 0.0, PI, ang_max);
        let (tp, wtp) = composite_rule(order, 0.0, PI, ang_max);
        let psi = |s: f64| -> f64 {
            tp.iter()
                .zip(&wtp)
                .map(|(&t, &w)| w * t.sin() * rb.fourier(s * t.cos()).0)
                .sum()
        };
        let mut total = 0.0;
        for (&t, &w1) in th.iter().zip(&wt) {
            for (&p, &w2) in ph.iter().zip(&wp) {
                let e = unit3(t, p);
                let (fa, _) = ra.fourier(dot(&k, &e));
                total += w1 * w2 * t.sin() * fa * psi(perp_norm(&l, &e));
            }
        }
        total
    }
}
