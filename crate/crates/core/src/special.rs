//! Complete Fermi–Dirac and Bose–Einstein integrals and the zeta function.
//!
//! `F_ν(z) = -Li_ν(-z)` and `B_ν(z) = Li_ν(z)`, both normalised so that
//! `F_ν(z) = 1/Γ(ν) ∫_0^∞ x^{ν-1} / (z^{-1} e^x + 1) dx`.

use statrs::function::gamma::gamma;

use crate::quadrature;

/// Fermi integrals switch from quadrature to the Sommerfeld expansion above
/// this value of `μ = ln z`. For non-integer `ν` the asymptotic series is only
/// accurate to about `e^{-μ}`, so the switch sits well inside the regime where
/// that is below round-off of the quadrature branch.
pub const SOMMERFELD_SWITCH: f64 = 30.0;

/// Bose integrals use the power series when it needs at most this many terms.
const BOSE_SERIES_TERMS: f64 = 2.0e5;

/// Terms of the accelerated alternating sums; error ≈ 5.8^{-n}.
const CVZ_TERMS: usize = 40;

/// Sum `Σ_{k≥0} (-1)^k a_k` for a totally monotone sequence using the
/// Cohen–Rodriguez Villegas–Zagier acceleration.
fn alternating_sum<A: Fn(usize) -> f64>(a: A) -> f64 {
    let n = CVZ_TERMS;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Riemann zeta function for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is only implemented for s > 1");
    let eta = alternating_sum(|k| ((k + 1) as f64).powf(-s));
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Dirichlet eta function `η(s) = (1 - 2^{1-s}) ζ(s)` for `s > 0`.
pub fn eta(s: f64) -> f64 {
    alternating_sum(|k| ((k + 1) as f64).powf(-s))
}

/// `F_ν(z) = -Li_ν(-z)` for `z ≥ 0`, `ν > 0`.
pub fn fermi_dirac(nu: f64, z: f64) -> f64 {
    assert!(nu > 0.0 && z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    if z <= 1.0 {
        return fermi_series(nu, z);
    }
    if z.is_infinite() {
        return f64::INFINITY;
    }
    let mu = z.ln();
    if mu >= SOMMERFELD_SWITCH {
        fermi_sommerfeld(nu, mu)
    } else {
        fermi_quadrature(nu, mu)
    }
}

/// `F_ν(e^μ)` evaluated from the chemical potential, avoiding overflow of `z`.
pub fn fermi_dirac_mu(nu: f64, mu: f64) -> f64 {
    if mu <= 0.0 {
        fermi_series(nu, mu.exp())
    } else if mu >= SOMMERFELD_SWITCH {
        fermi_sommerfeld(nu, mu)
    } else {
        fermi_quadrature(nu, mu)
    }
}

/// Alternating series branch, `0 < z ≤ 1`.
pub fn fermi_series(nu: f64, z: f64) -> f64 {
    let lz = z.ln();
    alternating_sum(|k| {
        let kk = (k + 1) as f64;
        (kk * lz - nu * kk.ln()).exp()
    })
}

/// Quadrature branch: `1/Γ(ν) ∫ x^{ν-1}/(e^{x-μ}+1) dx` with `x = t²`.
pub fn fermi_quadrature(nu: f64, mu: f64) -> f64 {
    let integrand = |t: f64| {
        if t == 0.0 {
            return if nu == 0.5 { 2.0 / (1.0 + (-mu).exp()) } else { 0.0 };
        }
        let x = t * t;
        let occ = if x > mu {
            let e = (-(x - mu)).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + (x - mu).exp())
        };
        2.0 * t.powf(2.0 * nu - 1.0) * occ
    };
    let split = mu.max(0.0).sqrt();
    let top = (mu.max(0.0) + 60.0).sqrt();
    let (a, _) = quadrature::integrate(integrand, 0.0, split, 0.0, 1e-15, 4000);
    let (b, _) = quadrature::integrate(integrand, split, top, 0.0, 1e-15, 4000);
    (a + b) / gamma(nu)
}

/// Sommerfeld expansion of `F_ν(e^μ)` for large `μ`:
/// `μ^ν/Γ(ν+1) [1 + Σ_k 2η(2k) ν(ν-1)…(ν-2k+1) μ^{-2k}] - cos(πν) F_ν(e^{-μ})`.
pub fn fermi_sommerfeld(nu: f64, mu: f64) -> f64 {
    let mut bracket = 1.0;
    let mut falling = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let a = nu - (2 * k - 2) as f64;
        let b = nu - (2 * k - 1) as f64;
        falling *= a * b;
        if falling == 0.0 {
            break;
        }
        let term = 2.0 * eta(2.0 * k as f64) * falling * mu.powi(-2 * k as i32);
        if term.abs() > prev {
            break;
        }
        bracket += term;
        prev = term.abs();
        if term.abs() < 1e-18 * bracket.abs() {
            break;
        }
    }
    let lead = mu.powf(nu) / gamma(nu + 1.0) * bracket;
    lead - (std::f64::consts::PI * nu).cos() * fermi_series(nu, (-mu).exp())
}

/// `B_ν(z) = Li_ν(z)` for `0 ≤ z ≤ 1`; `+∞` at `z = 1` when `ν ≤ 1`.
pub fn bose_einstein(nu: f64, z: f64) -> f64 {
    assert!(nu > 0.0 && (0.0..=1.0).contains(&z), "Bose integral needs 0 ≤ z ≤ 1");
    if z == 0.0 {
        return 0.0;
    }
    if z == 1.0 {
        return if nu > 1.0 { zeta(nu) } else { f64::INFINITY };
    }
    let b = -z.ln();
    if 40.0 / b <= BOSE_SERIES_TERMS {
        bose_series(nu, z)
    } else {
        bose_quadrature(nu, b)
    }
}

/// `B_ν(e^{-b})` parameterised by `b = -ln z ≥ 0`, which keeps resolution as
/// `z → 1`. `ν = 1` uses the closed form `-ln(1 - e^{-b})`.
pub fn bose_einstein_b(nu: f64, b: f64) -> f64 {
    assert!(nu > 0.0 && b >= 0.0);
    if b == 0.0 {
        return if nu > 1.0 { zeta(nu) } else { f64::INFINITY };
    }
    if nu == 1.0 {
        return -(-(-b).exp_m1()).ln();
    }
    if 40.0 / b <= BOSE_SERIES_TERMS {
        bose_series(nu, (-b).exp())
    } else {
        bose_quadrature(nu, b)
    }
}

/// Power series `Σ_{k≥1} z^k / k^ν`.
pub fn bose_series(nu: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = 1.0;
    let mut k = 1usize;
    loop {
        zk *= z;
        let term = zk * (k as f64).powf(-nu);
        sum += term;
        if term < 1e-17 * sum || zk == 0.0 {
            return sum;
        }
        k += 1;
    }
}

/// `1/Γ(ν) ∫ x^{ν-1}/(e^{x+b}-1) dx` with `b = -ln z` and `x = t²`.
pub fn bose_quadrature(nu: f64, b: f64) -> f64 {
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let x = t * t;
        2.0 * t.powf(2.0 * nu - 1.0) / (x + b).exp_m1()
    };
    let knee = b.sqrt().max(1e-300);
    let (a, _) = quadrature::integrate(integrand, 0.0, knee.min(7.0), 0.0, 1e-15, 4000);
    let (c, _) = quadrature::integrate(integrand, knee.min(7.0), 7.5, 0.0, 1e-15, 4000);
    (a + c) / gamma(nu)
}
