use std::path::Path;
use std::process::{Command, Output};

fn bne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bne")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn presets_and_show() {
    let out = bne(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "relax.fd2d.ball.r105"));
    let out = bne(&["show", "relax.fd2d.ball.r05"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("stats = fermi_r(0.5)"));
    assert_eq!(bne(&["show", "nope"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "dim = 3\nkernel = maxwell2d\n");
    let out = bne(&["run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));

    let missing = dir.path().join("missing.cfg").display().to_string();
    assert_eq!(bne(&["run", &missing]).status.code(), Some(1));

    let blow = write(
        dir.path(),
        "blow.cfg",
        "n = 16\nL = 6\nstats = fermi_r(0.5)\nic = ball_indicator(rho = 1, u = [0, 0], e = 1)\nt_final = 1\nblowup_bound = 0.01\n",
    );
    assert_eq!(bne(&["run", &blow]).status.code(), Some(3));

    let ok = write(dir.path(), "ok.cfg", "n = 16\nt_final = 0.1\n");
    let out_dir = dir.path().join("out");
    let out = bne(&["run", &ok, "--out", out_dir.to_str().unwrap(), "--cache", dir.path().join("kc").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out_dir.join("series.ndjson").exists());
}

#[test]
fn oracle_command() {
    let dir = tempfile::tempdir().unwrap();
    let small = write(dir.path(), "small.cfg", "n = 8\nL = 4\nstats = bose(1)\nic = quantum_maxwellian(rho = 0.5, u = [0, 0], sigma = 1)\n");
    let out = bne(&["oracle", &small, "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let big = write(dir.path(), "big.cfg", "n = 128\n");
    assert_eq!(bne(&["oracle", &big]).status.code(), Some(2));
}

#[test]
fn residual_command_prints_rows() {
    let out = bne(&["residual", "residual.fd2d.sigma05.L4", "--n", "16", "--frame", "rescaled"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[0], "16");
    assert_eq!(cols[1], "rescaled");
    let r: f64 = cols[2].parse().unwrap();
    assert!(r > 0.0 && r < 1e-2);
    assert_eq!(bne(&["residual", "relax.fd2d.ball.r05"]).status.code(), Some(2));
}

#[test]
fn kernel_cache_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.cfg", "n = 16\n");
    let kc = dir.path().join("kc");
    let first = bne(&["kernel-cache", &cfg, "--dir", kc.to_str().unwrap()]);
    assert!(String::from_utf8(first.stdout).unwrap().starts_with("built"));
    let second = bne(&["kernel-cache", &cfg, "--dir", kc.to_str().unwrap()]);
    assert!(String::from_utf8(second.stdout).unwrap().starts_with("loaded"));
}
