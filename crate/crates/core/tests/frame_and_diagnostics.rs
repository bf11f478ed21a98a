mod common;

use std::f64::consts::PI;

use bne_core::diagnostics::{self, Entropy, Samples};
use bne_core::dynamics::divergence_term;
use bne_core::equilibrium::InitialProfile;
use bne_core::frame::Frame;
use bne_core::grid::{build_grid, GridSpec, Transform};
use bne_core::stats::ParticleStatistics;
use proptest::prelude::*;
use rand::Rng;

fn gaussian(grid: &GridSpec, frame: &Frame, rho: f64, u: [f64; 3], var: [f64; 3]) -> Vec<f64> {
    let d = grid.dim;
    (0..grid.len())
        .map(|j| {
            let v = frame.velocity(grid, j);
            let mut x = rho;
            for a in 0..d {
                x *= (-(v[a] - u[a]).powi(2) / (2.0 * var[a])).exp() / (2.0 * PI * var[a]).sqrt();
            }
            x
        })
        .collect()
}

#[test]
fn classical_frame_is_the_identity_map() {
    let grid = build_grid(2, 16, 4.0, 1.0).unwrap();
    let fr = Frame::classical(2, 4.0);
    assert_eq!(fr.lambda(), 0.0);
    assert!((fr.mu - (4.0 / PI).powi(2)).abs() < 1e-15);
    assert!((fr.density_factor() - 1.0).abs() < 1e-15);
    for j in 0..grid.len() {
        let xi = grid.node(j);
        let v = fr.velocity(&grid, j);
        assert!((v[0] - 4.0 * xi[0] / PI).abs() < 1e-15 && (v[1] - 4.0 * xi[1] / PI).abs() < 1e-15);
    }
    // Constant f maps to a constant scaled by 1/(μ s^d).
    let fr = Frame::rescaled(3, 2.0, [0.1, 0.2, 0.3], 0.7);
    let s = PI * 0.7 / 2.0;
    let g = fr.to_rescaled(&[2.0; 8]);
    assert!(g.iter().all(|v| (v - 2.0 / s.powi(3)).abs() < 1e-14));
}

#[test]
fn rescaled_nodes_cover_the_shifted_box() {
    let grid = build_grid(2, 32, 4.0, 1.0).unwrap();
    let u = [0.4, -1.1, 0.0];
    let fr = Frame::rescaled(2, 4.0, u, 1.6);
    let half = 4.0 / 1.6;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for j in 0..grid.len() {
        let v = fr.velocity(&grid, j);
        for a in 0..2 {
            lo[a] = lo[a].min(v[a] - u[a]);
            hi[a] = hi[a].max(v[a] - u[a]);
        }
    }
    let h = 2.0 * half / 32.0;
    for a in 0..2 {
        assert!((lo[a] + half).abs() < 1e-13);
        assert!((hi[a] - (half - h)).abs() < 1e-13);
    }
    assert!((fr.cell_volume(&grid) - h * h).abs() < 1e-15);
}

#[test]
fn scale_factor_examples() {
    let l = 4.0;
    let fr = Frame::classical(2, l);
    let (ae, cp) = fr.scale_factors(0.0, 1.0, 2.0);
    assert_eq!(ae, 0.0);
    assert!((cp - 2.0 * (PI / l).powf(-2.0 - 1.0)).abs() < 1e-13);

    let fr = Frame::rescaled(3, l, [0.0; 3], l / PI);
    let (ae, _) = fr.scale_factors(0.3, 1.0, 1.0);
    assert!((ae - 0.3).abs() < 1e-15);
    let fr2 = Frame::rescaled(3, l, [0.0; 3], 2.0 * l / PI);
    let (ae2, cp2) = fr2.scale_factors(0.3, 1.0, 1.0);
    assert!((ae2 - 8.0 * 0.3).abs() < 1e-14);
    assert!((cp2 - 0.5).abs() < 1e-15);
}

#[test]
fn moment_rate_examples() {
    let grid = build_grid(2, 16, 4.0, 1.0).unwrap();
    let fr = Frame::rescaled(2, 4.0, [0.0; 3], 1.0);
    let r = fr.moment_rates(&grid, &vec![0.0; grid.len()], [0.0; 3]);
    assert_eq!((r.mass, r.momentum, r.energy), (0.0, [0.0; 3], 0.0));
    // Odd in ξ₁ (the unpaired −n/2 row is left at zero).
    let q: Vec<f64> = (0..grid.len())
        .map(|j| {
            let m = grid.multi_index(j);
            if m[0] == -8 {
                0.0
            } else {
                grid.node(j)[0] * (-grid.node(j)[1].powi(2)).exp()
            }
        })
        .collect();
    let r = fr.moment_rates(&grid, &q, [0.0; 3]);
    assert!(r.mass.abs() < 1e-14 && r.energy.abs() < 1e-13);
    assert!(r.momentum[0] > 0.1);
}

#[test]
fn divergence_examples() {
    let grid = build_grid(2, 32, 4.0, 1.0).unwrap();
    let tr = Transform::new(&grid);
    let fr = Frame::rescaled(2, 4.0, [0.0; 3], 1.3);
    let mut rng = common::rng(3);
    let g = common::random_field(&mut rng, grid.len());
    assert!(divergence_term(&tr, &g, &fr, 0.0, [0.0; 3]).iter().all(|&v| v == 0.0));

    // Narrow enough to be periodic to round-off on [−π, π)².
    let c = 2.5;
    let g: Vec<f64> = (0..grid.len())
        .map(|j| {
            let x = grid.node(j);
            (-c * (x[0] * x[0] + x[1] * x[1])).exp()
        })
        .collect();
    let (wr, ur) = (0.7, [0.4, -0.9, 0.0]);
    let shift = PI * fr.omega / fr.half_width_l;
    let div = divergence_term(&tr, &g, &fr, wr, ur);
    for j in 0..grid.len() {
        let x = grid.node(j);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let mut want = wr * (2.0 - 2.0 * c * r2) * g[j];
        for a in 0..2 {
            want += shift * ur[a] * 2.0 * c * x[a] * g[j];
        }
        assert!((div[j] - want).abs() < 1e-8, "node {j}: {} vs {want}", div[j]);
    }
}

#[test]
fn gaussian_moments_and_stress() {
    let grid = build_grid(2, 64, 8.0, 1.0).unwrap();
    let fr = Frame::classical(2, 8.0);
    let f = gaussian(&grid, &fr, 1.0, [0.0; 3], [1.0; 3]);
    let m = Samples { dim: 2, f: f.clone(), v: (0..grid.len()).map(|j| fr.velocity(&grid, j)).collect(), dv: fr.cell_volume(&grid) }.moments();
    assert!((m.rho - 1.0).abs() < 1e-12);
    assert!(m.u[0].abs() < 1e-12 && m.u[1].abs() < 1e-12);
    assert!((m.e - 1.0).abs() < 1e-8);

    let ub = [0.5, -0.3, 0.0];
    let f = gaussian(&grid, &fr, 1.0, ub, [1.0; 3]);
    let g = fr.to_rescaled(&f);
    let m = diagnostics::moments(&grid, &fr, &g);
    assert!((m.u[0] - 0.5).abs() < 1e-8 && (m.u[1] + 0.3).abs() < 1e-8);
    assert!((m.ec - (0.34 + 2.0)).abs() < 1e-8);

    let s = Samples::from_rescaled(&grid, &fr, &g).stress_tensor();
    assert!((s[0][0] - 1.0).abs() < 1e-8 && (s[1][1] - 1.0).abs() < 1e-8 && s[0][1].abs() < 1e-8);
    assert_eq!(s[0][1], s[1][0]);

    let grid = build_grid(2, 128, 16.0, 1.0).unwrap();
    let fr = Frame::classical(2, 16.0);
    let f = gaussian(&grid, &fr, 1.0, [0.0; 3], [1.0, 4.0, 1.0]);
    let smp = Samples { dim: 2, f, v: (0..grid.len()).map(|j| fr.velocity(&grid, j)).collect(), dv: fr.cell_volume(&grid) };
    let s = smp.stress_tensor();
    assert!((s[0][0] - 1.0).abs() < 1e-6 && (s[1][1] - 4.0).abs() < 1e-6 && s[0][1].abs() < 1e-6);
    let m = smp.moments();
    assert!(((s[0][0] + s[1][1]) / 2.0 - m.e).abs() < 1e-10);
}

#[test]
fn zero_field_and_trivial_norms() {
    let grid = build_grid(2, 16, 4.0, 1.0).unwrap();
    let fr = Frame::rescaled(2, 4.0, [0.3, 0.2, 0.0], 1.0);
    let zero = vec![0.0; grid.len()];
    let m = diagnostics::moments(&grid, &fr, &zero);
    assert_eq!((m.rho, m.u, m.ec, m.e), (0.0, [0.0; 3], 0.0, 0.0));
    let smp = Samples::from_rescaled(&grid, &fr, &zero);
    assert_eq!(smp.stress_tensor(), [[0.0; 3]; 3]);
    assert_eq!(smp.relaxation_error(&smp.f), 0.0);
    assert_eq!(smp.entropy_dissipation(&zero, 0.1), Some(0.0));
    assert_eq!(diagnostics::linf_residual(&zero), 0.0);

    // Indicator field: ℓ¹ is its mass.
    let f: Vec<f64> = (0..grid.len()).map(|j| if j % 3 == 0 { 0.25 } else { 0.0 }).collect();
    let smp = Samples { dim: 2, f, v: (0..grid.len()).map(|j| fr.velocity(&grid, j)).collect(), dv: fr.cell_volume(&grid) };
    assert!((smp.lp_norm(1.0) - smp.moments().rho).abs() < 1e-15);
}

#[test]
fn entropy_examples() {
    let grid = build_grid(2, 16, 4.0, 1.0).unwrap();
    let fr = Frame::classical(2, 4.0);
    let c = 0.03;
    let f = vec![c; grid.len()];
    let smp = Samples { dim: 2, f: f.clone(), v: (0..grid.len()).map(|j| fr.velocity(&grid, j)).collect(), dv: fr.cell_volume(&grid) };
    let want = c * c.ln() * 64.0;
    assert!((smp.entropy(0.0).value().unwrap() - want).abs() < 1e-13);
    let alpha = 1.0 / 9.0;
    let want_q = (c * c.ln() + (1.0 - alpha * c) / alpha * (1.0 - alpha * c).ln()) * 64.0;
    assert!((smp.entropy(alpha).value().unwrap() - want_q).abs() < 1e-12);

    // Fermi bound broken at one node.
    let mut f = f;
    f[5] = 9.0;
    let smp = Samples { f, ..smp };
    assert_eq!(smp.entropy(alpha), Entropy::Undefined { node: 5 });
    assert!(smp.entropy_dissipation(&vec![1.0; grid.len()], alpha).is_none());
    assert!(smp.entropy_dissipation(&vec![0.0; grid.len()], alpha) == Some(0.0));
    // Undershoots enter through f ln|f|.
    let mut neg = vec![c; grid.len()];
    neg[2] = -1e-9;
    neg[3] = -1e-7;
    let dv = fr.cell_volume(&grid);
    let want = dv * (c * c.ln() * (grid.len() - 2) as f64 - 1e-9 * 1e-9f64.ln() - 1e-7 * 1e-7f64.ln());
    match diagnostics::entropy(&grid, &fr, &neg, 0.0) {
        Entropy::Defined { value, negative } => {
            assert_eq!(negative, 2);
            assert!((value - want).abs() < 1e-13, "{value} vs {want}");
        }
        e => panic!("{e:?}"),
    }
    neg[4] = f64::NAN;
    assert_eq!(diagnostics::entropy(&grid, &fr, &neg, 0.0), Entropy::Undefined { node: 4 });
}

#[test]
fn l2_norm_of_a_gaussian() {
    let grid = build_grid(3, 32, 8.0, 1.0).unwrap();
    let fr = Frame::classical(3, 8.0);
    let (rho, t) = (1.5, 0.8);
    let f = gaussian(&grid, &fr, rho, [0.0; 3], [t; 3]);
    let l2 = diagnostics::lp_norm(&grid, &fr, &fr.to_rescaled(&f), 2.0);
    let want = (rho * rho * (4.0 * PI * t).powf(-1.5)).sqrt();
    assert!((l2 - want).abs() < 1e-6);
}

#[test]
fn equilibrium_entropy_dissipation_is_tiny() {
    let grid = build_grid(2, 32, 4.0, 1.0).unwrap();
    let stats = ParticleStatistics::fermi(2, 3.0);
    let st = InitialProfile::QuantumMaxwellian { rho: 1.0, u: [0.0; 3], sigma: 0.5 }.state(2, &stats).unwrap();
    let fr = Frame::rescaled(2, 4.0, [0.0; 3], 0.5f64.sqrt());
    let f = st.discretize(&grid, &fr).unwrap();
    let smp = Samples { dim: 2, f: f.clone(), v: (0..grid.len()).map(|j| fr.velocity(&grid, j)).collect(), dv: fr.cell_volume(&grid) };
    // A rate of size 1e-6 yields a dissipation at most of that order.
    let q: Vec<f64> = f.iter().map(|x| 1e-6 * x).collect();
    assert!(smp.entropy_dissipation(&q, stats.alpha()).unwrap().abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frame_round_trip(seed in any::<u64>(), omega in 0.1f64..5.0, l in 1.0f64..10.0, dim in 2usize..=3) {
        let fr = Frame::rescaled(dim, l, [0.2, -0.1, 0.5], omega);
        let mut rng = common::rng(seed);
        let f = common::random_field(&mut rng, 64);
        let back = fr.from_rescaled(&fr.to_rescaled(&f));
        prop_assert!(common::rel_err(&back, &f) <= 1e-13);
    }

    #[test]
    fn both_diagnostic_paths_agree(seed in any::<u64>(), omega in 0.3f64..3.0, rescaled in any::<bool>(), dim in 2usize..=3) {
        let n = if dim == 2 { 16 } else { 8 };
        let l = 4.0;
        let grid = build_grid(dim, n, l, 1.0).unwrap();
        let fr = if rescaled { Frame::rescaled(dim, l, [0.3, -0.2, 0.1], omega) } else { Frame::classical(dim, l) };
        let mut rng = common::rng(seed);
        let g: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
        let alpha = 0.01 / fr.density_factor();
        let smp = Samples::from_rescaled(&grid, &fr, &g);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        let (ma, mb) = (smp.moments(), diagnostics::moments(&grid, &fr, &g));
        prop_assert!(close(ma.rho, mb.rho) && close(ma.ec, mb.ec) && close(ma.e, mb.e));
        for a in 0..dim {
            prop_assert!((ma.u[a] - mb.u[a]).abs() <= 1e-12 * (1.0 + ma.u[a].abs()));
        }
        let ha = smp.entropy(alpha).value().unwrap();
        let hb = diagnostics::entropy(&grid, &fr, &g, alpha).value().unwrap();
        prop_assert!((ha - hb).abs() <= 1e-12 * (1.0 + ha.abs()), "{} vs {}", ha, hb);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            prop_assert!(close(smp.lp_norm(p), diagnostics::lp_norm(&grid, &fr, &g, p)));
        }
    }
}
