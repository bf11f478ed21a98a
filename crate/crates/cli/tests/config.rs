use std::f64::consts::PI;

use bne_cli::config::{parse_config, IcSpec, KernelSpec, SimConfig, StatsSpec};
use bne_cli::presets;

#[test]
fn empty_text_gives_defaults() {
    let c = parse_config("# nothing here\n\n").unwrap();
    assert_eq!(c, SimConfig::default());
}

#[test]
fn minimal_config() {
    let c = parse_config(
        "dim = 3\nn = 16\nL = 6\nkernel = hardsphere3d\nstats = bose(4.5)\n\
         ic = quantum_maxwellian(rho = 0.5, u = [0, 0, 1], sigma = 1)  # trailing comment\n",
    )
    .unwrap();
    assert_eq!((c.dim, c.n, c.l), (3, 16, 6.0));
    assert_eq!(c.kernel, KernelSpec::Hardsphere3d);
    assert_eq!(c.stats, StatsSpec::Bose { hbar: 4.5 });
    assert_eq!(c.ic, IcSpec::QuantumMaxwellian { rho: 0.5, u: [0.0, 0.0, 1.0], sigma: 1.0 });
}

#[test]
fn positional_and_named_arguments_agree() {
    let a = parse_config("ic = classical_maxwellian(2, [1, 0], 0.5)").unwrap();
    let b = parse_config("ic = classical_maxwellian(rho = 2, u = [1, 0], sigma = 0.5)").unwrap();
    assert_eq!(a, b);
}

#[test]
fn kernel_dimension_mismatch_is_rejected() {
    let e = parse_config("dim = 3\nkernel = maxwell2d\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.msg.contains("maxwell2d"), "{e}");
}

#[test]
fn relative_hbar_uses_the_critical_value() {
    let c = parse_config("stats = fermi_r(0.5)\nic = ball_indicator(rho = 1, u = [0, 0], e = 1)\n").unwrap();
    let r = c.resolve().unwrap();
    let star = (4.0 * PI).sqrt();
    assert!((r.hbar_star.unwrap() - star).abs() < 1e-12);
    assert!((r.stats.hbar - 0.5 * star).abs() < 1e-12);
}

#[test]
fn errors_carry_line_and_column() {
    let e = parse_config("n = 16\ndt = abc\n").unwrap_err();
    assert_eq!((e.line, e.col), (2, 6));
    assert!(e.to_string().starts_with("line 2, column 6:"), "{e}");
}

#[test]
fn unknown_and_duplicate_keys_are_errors() {
    let e = parse_config("n = 16\nfoo = 1\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.msg.contains("foo"));
    let e = parse_config("n = 16\nn = 32\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.msg.contains("duplicate"));
}

#[test]
fn quantum_maxwellian_needs_quantum_statistics() {
    assert!(parse_config("ic = quantum_maxwellian(rho = 1, u = [0, 0], sigma = 1)").is_err());
}

#[test]
fn velocity_length_must_match_dimension() {
    assert!(parse_config("ic = classical_maxwellian(rho = 1, u = [0, 0, 0], sigma = 1)").is_err());
}

#[test]
fn non_positive_parameters_are_rejected() {
    for text in ["dt = 0", "L = -1", "n = 0", "stats = fermi(0)", "record_every = 0", "c = -1"] {
        assert!(parse_config(text).is_err(), "{text}");
    }
}

#[test]
fn snapshot_times_accept_optional_brackets() {
    let a = parse_config("snapshot_times = 0, 0.5, 2").unwrap();
    let b = parse_config("snapshot_times = [0, 0.5, 2]").unwrap();
    assert_eq!(a.snapshot_times, vec![0.0, 0.5, 2.0]);
    assert_eq!(a, b);
}

#[test]
fn text_form_round_trips_for_every_preset() {
    for id in presets::catalogue() {
        let c = match presets::lookup(&id).unwrap() {
            presets::Preset::Residual(r) => r.config,
            presets::Preset::Relax(r) => r.config,
        };
        let back = parse_config(&c.to_text()).unwrap_or_else(|e| panic!("{id}: {e}"));
        assert_eq!(back, c, "{id}");
        assert_eq!(back.hash(), c.hash());
    }
}

#[test]
fn hash_is_stable_and_sensitive() {
    let a = SimConfig::default();
    assert_eq!(a.hash(), SimConfig::default().hash());
    assert_eq!(a.hash().len(), 64);
    let b = SimConfig { dt: 0.0125, ..SimConfig::default() };
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn vhs_kernel_builds_a_quadrature_table() {
    // γ = 1 in 3D makes the radial weight constant, so a low order converges.
    let c = parse_config("dim = 3\nn = 8\nkernel = vhs(gamma = 1, c_phi = 2)\nquad_order = 16\n").unwrap();
    let r = c.resolve().unwrap();
    let t = c.build_table(&r.grid).unwrap();
    assert_eq!(t.gamma, 1.0);
    assert_eq!(t.c_phi, 2.0);
}

#[test]
fn under_resolved_vhs_quadrature_is_refused() {
    let c = parse_config("dim = 3\nn = 8\nkernel = vhs(gamma = 0.5, c_phi = 1)\nquad_order = 16\n").unwrap();
    let r = c.resolve().unwrap();
    assert!(c.build_table(&r.grid).is_err());
}

#[test]
fn text_form_round_trips_for_vhs_and_snapshots() {
    let c = parse_config(
        "dim = 3\nn = 8\nkernel = vhs(gamma = 0.5, c_phi = 2)\nquad_order = 128\nintegrator = euler\n\
         snapshot_times = [0, 1.5]\nrecord_every = 3\nthreads = 2\ndeterministic = false\n",
    )
    .unwrap();
    let back = parse_config(&c.to_text()).unwrap();
    assert_eq!(back, c);
    assert!(parse_config("kernel = vhs(gamma = 0, c_phi = 1)\nc_phi = 2\n").is_err());
}
