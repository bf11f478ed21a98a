use bne_cli::config::{parse_config, IcSpec, KernelSpec, SimConfig, StatsSpec};
use bne_cli::output;
use bne_cli::presets::{self, lookup, Preset};
use bne_cli::run::{self, Outcome, Setup};

#[test]
fn preset_ids_decode() {
    let Some(Preset::Residual(r)) = lookup("residual.fd2d.sigma05.L4.ub") else { panic!() };
    assert_eq!(r.config.dim, 2);
    assert_eq!(r.config.l, 4.0);
    assert_eq!(r.config.stats, StatsSpec::Fermi { hbar: 3.0 });
    let u = presets::u_b();
    assert!((u[0] - 8.0 / (3.0 * 2f64.sqrt() + 2.0)).abs() < 1e-15);
    assert_eq!(r.config.ic, IcSpec::QuantumMaxwellian { rho: 1.0, u, sigma: 0.5 });
    assert_eq!(r.grids, vec![16, 32, 64]);

    let Some(Preset::Residual(r)) = lookup("residual.be3d.sigma1.L6.rho02") else { panic!() };
    assert_eq!(r.config.kernel, KernelSpec::Hardsphere3d);
    assert_eq!(r.config.ic, IcSpec::QuantumMaxwellian { rho: 0.2, u: [0.0; 3], sigma: 1.0 });

    let Some(Preset::Relax(r)) = lookup("relax.be3d.ball.r105") else { panic!() };
    assert_eq!(r.config.stats, StatsSpec::BoseR { r: 1.05 });
    assert_eq!(r.config.dim, 3);
    assert!(!r.config.rescaling);

    let Some(Preset::Residual(r)) = lookup("residual.fd2d.sigma1.L4p5") else { panic!() };
    assert_eq!(r.config.l, 4.5);

    for bad in ["", "residual", "residual.xx2d.sigma1.L4", "relax.fd2d.cube.r1", "relax.fd2d.ball.r0", "residual.fd3d.sigma1.L4.ub", "résidual.fd2d"] {
        assert!(lookup(bad).is_none(), "{bad}");
    }
    let all = presets::catalogue();
    assert!(all.iter().all(|id| lookup(id).is_some()));
    let mut dedup = all.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), all.len());
}

#[test]
fn zero_collision_run_is_constant() {
    let config = parse_config(
        "n = 16\nL = 6\nc = 0\nstats = fermi(2)\nic = quantum_maxwellian(rho = 1, u = [0.3, 0], sigma = 1)\nt_final = 0.5\n",
    )
    .unwrap();
    let run = Setup::new(&config).unwrap().run();
    assert_eq!(run.outcome, Outcome::Completed);
    assert_eq!(run.records.len(), 21);
    let first = &run.records[0];
    for r in &run.records {
        assert_eq!(r.rho, first.rho);
        assert_eq!(r.e, first.e);
        assert_eq!(r.u, first.u);
        assert_eq!(r.entropy, first.entropy);
        assert_eq!(r.max_f, first.max_f);
    }
}

#[test]
fn runs_are_deterministic() {
    let config = parse_config(
        "n = 16\nL = 6\nstats = bose(2)\nic = ball_indicator(rho = 1, u = [0, 0], e = 1)\nt_final = 0.5\nrecord_every = 2\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let setup = Setup::new(&config).unwrap();
        let out = dir.path().join(format!("r{k}"));
        output::write_run(&out, &config, "det", setup.grid(), &setup.run()).unwrap();
        texts.push(std::fs::read(out.join("series.ndjson")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn record_every_thins_the_series() {
    let config = SimConfig { n: 16, t_final: 0.5, record_every: 5, ..SimConfig::default() };
    let run = Setup::new(&config).unwrap().run();
    let steps: Vec<usize> = run.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 5, 10, 15, 20]);
}

#[test]
fn classical_run_relaxes_toward_its_limit() {
    let config = parse_config("n = 32\nL = 8\nic = ball_indicator(rho = 1, u = [0, 0], e = 1)\nt_final = 2\n").unwrap();
    let run = Setup::new(&config).unwrap().run();
    let first = run.records.first().unwrap().relax_error.unwrap();
    let last = run.records.last().unwrap().relax_error.unwrap();
    assert!(last < 0.5 * first, "{first} -> {last}");
    assert!((run.records.last().unwrap().rho - run.records[0].rho).abs() < 1e-12);
}

#[test]
fn tiny_blowup_bound_ends_the_run() {
    let config = parse_config(
        "n = 16\nL = 6\nstats = fermi_r(0.5)\nic = ball_indicator(rho = 1, u = [0, 0], e = 1)\nt_final = 1\nblowup_bound = 0.01\n",
    )
    .unwrap();
    let run = Setup::new(&config).unwrap().run();
    assert!(run.blew_up());
    assert!(matches!(run.outcome, Outcome::BlowUp { .. }));
    assert!(run.records.last().unwrap().flags.iter().any(|f| f == "blowup"));
}

#[test]
fn residual_is_small_and_shrinks_with_the_grid() {
    let Some(Preset::Residual(case)) = lookup("residual.fd2d.sigma05.L4") else { panic!() };
    let mut prev = f64::INFINITY;
    for n in [16, 32] {
        let config = SimConfig { n, ..case.config.clone() };
        let resolved = config.resolve().unwrap();
        let table = config.build_table(&resolved.grid).unwrap();
        let r = run::residual(&resolved, table).unwrap();
        assert!(r.phys.is_finite() && r.phys < 1e-2, "n = {n}: {}", r.phys);
        assert!(r.phys < prev);
        prev = r.phys;
        assert!((r.omega - 0.5f64.sqrt()).abs() < 1e-3);
    }
}
