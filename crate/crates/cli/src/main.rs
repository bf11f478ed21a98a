use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bne_cli::cache;
use bne_cli::config::{parse_config, SimConfig};
use bne_cli::output;
use bne_cli::presets::{self, Preset};
use bne_cli::run::{self, Outcome, Record, RunError, Setup};
use bne_core::error::CollisionError;
use bne_core::oracle::direct_q_oracle;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Fourier–Galerkin solver for the space-homogeneous Boltzmann–Nordheim equation.
#[derive(Parser)]
#[command(name = "bne", version)]
struct Cli {
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrameChoice {
    Both,
    Rescaled,
    Classical,
}

#[derive(Subcommand)]
enum Cmd {
    /// Steady-state residual of a `residual.*` preset over its grids.
    Residual {
        preset: String,
        /// Grid sizes, overriding the preset defaults.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = FrameChoice::Both)]
        frame: FrameChoice,
    },
    /// Time integration of a `relax.*` preset.
    Relax {
        preset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        record_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time integration of a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Kernel table cache directory.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Builds (or loads) the kernel table of a configuration into a cache directory.
    KernelCache {
        config: PathBuf,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Compares the fast collision operator with the direct sums on a random field.
    Oracle {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Lists the built-in presets.
    Presets,
    /// Prints the configuration of a preset.
    Show { preset: String },
}

enum Failure {
    Io(String),
    Config(String),
    BlowUp(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::BlowUp(_) => EXIT_BLOWUP,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::BlowUp(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(_) => Failure::Config(e.to_string()),
            RunError::Io { .. } => Failure::Io(e.to_string()),
            RunError::Numerical(_) => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Residual { preset, n, frame } => residual(&preset, &n, frame),
        Cmd::Relax { preset, n, t_final, record_every, out } => {
            let mut config = match presets::lookup(&preset) {
                Some(Preset::Relax(c)) => c.config,
                _ => return Err(Failure::Config(format!("unknown relaxation preset '{preset}'"))),
            };
            if let Some(n) = n {
                config.n = n;
            }
            if let Some(t) = t_final {
                config.t_final = t;
            }
            if let Some(r) = record_every {
                config.record_every = r;
            }
            let setup = Setup::new(&config)?;
            integrate(&setup, &preset, out.as_deref())
        }
        Cmd::Run { config, out, cache: dir } => {
            let config = read_config(&config)?;
            let resolved = config.resolve().map_err(|e| Failure::Config(e.to_string()))?;
            let setup = match dir {
                Some(dir) => {
                    let (table, _) = cache::cached_table(&config, &resolved.grid, &dir)?;
                    Setup::with_table(resolved, table)?
                }
                None => Setup::new(&config)?,
            };
            integrate(&setup, "run", out.as_deref())
        }
        Cmd::KernelCache { config, dir } => {
            let config = read_config(&config)?;
            let resolved = config.resolve().map_err(|e| Failure::Config(e.to_string()))?;
            let start = Instant::now();
            let (table, loaded) = cache::cached_table(&config, &resolved.grid, &dir)?;
            println!(
                "{} {} ({} modes, {:.2}s)",
                if loaded { "loaded" } else { "built" },
                table.kind.id(),
                table.count_p(),
                start.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Cmd::Oracle { config, seed } => oracle(&read_config(&config)?, seed),
        Cmd::Presets => {
            for id in presets::catalogue() {
                println!("{id}");
            }
            Ok(())
        }
        Cmd::Show { preset } => {
            let config = match presets::lookup(&preset) {
                Some(Preset::Relax(c)) => c.config,
                Some(Preset::Residual(c)) => c.config,
                None => return Err(Failure::Config(format!("unknown preset '{preset}'"))),
            };
            print!("{}", config.to_text());
            Ok(())
        }
    }
}

fn read_config(path: &Path) -> Result<SimConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn residual(id: &str, grids: &[usize], frame: FrameChoice) -> Result<(), Failure> {
    let case = match presets::lookup(id) {
        Some(Preset::Residual(c)) => c,
        _ => return Err(Failure::Config(format!("unknown residual preset '{id}'"))),
    };
    let grids = if grids.is_empty() { case.grids.clone() } else { grids.to_vec() };
    let frames: &[bool] = match frame {
        FrameChoice::Both => &[true, false],
        FrameChoice::Rescaled => &[true],
        FrameChoice::Classical => &[false],
    };
    println!("{:>4} {:>9} {:>14} {:>14} {:>10}", "n", "frame", "residual", "raw", "omega");
    for &n in &grids {
        for &rescaling in frames {
            let config = SimConfig { n, rescaling, ..case.config.clone() };
            let resolved = config.resolve().map_err(|e| Failure::Config(e.to_string()))?;
            let table = config.build_table(&resolved.grid).map_err(|e| Failure::Numerical(e.to_string()))?;
            let name = if rescaling { "rescaled" } else { "classical" };
            match run::residual(&resolved, table) {
                Ok(r) => println!("{n:>4} {name:>9} {:>14.6e} {:>14.6e} {:>10.6}", r.phys, r.raw, r.omega),
                Err(e) => println!("{n:>4} {name:>9} {:>14}  ({e})", "NaN"),
            }
        }
    }
    Ok(())
}

fn progress(r: &Record) {
    eprintln!(
        "t={:8.3} rho={:.12} e={:.10} H={} max_f={:.6e} relax={}",
        r.t,
        r.rho,
        r.e,
        r.entropy.map_or("undef".to_string(), |h| format!("{h:.10}")),
        r.max_f,
        r.relax_error.map_or("-".to_string(), |x| format!("{x:.3e}"))
    );
}

fn integrate(setup: &Setup, label: &str, out: Option<&Path>) -> Result<(), Failure> {
    let start = Instant::now();
    let record = setup.run_with(progress);
    eprintln!("finished in {:.1}s", start.elapsed().as_secs_f64());
    if let Some(dir) = out {
        output::write_run(dir, &setup.resolved.config, label, setup.grid(), &record)?;
    }
    match record.outcome {
        Outcome::Completed => Ok(()),
        Outcome::BlowUp { step, t, sup_norm } => {
            Err(Failure::BlowUp(format!("blow-up at step {step} (t = {t}), sup norm {sup_norm:.3e}")))
        }
        Outcome::Failed { message } => Err(Failure::Numerical(message)),
    }
}

/// Relative tolerance of the oracle comparison.
const ORACLE_TOL: f64 = 1e-11;

fn oracle(config: &SimConfig, seed: u64) -> Result<(), Failure> {
    let resolved = config.resolve().map_err(|e| Failure::Config(e.to_string()))?;
    let table = config.build_table(&resolved.grid).map_err(|e| Failure::Numerical(e.to_string()))?;
    let alpha = resolved.stats.alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..resolved.grid.len()).map(|_| rng.gen_range(0.0..0.5)).collect();
    let reference = match direct_q_oracle(&table, &g, alpha) {
        Ok(q) => q,
        Err(e @ CollisionError::OracleTooLarge { .. }) => return Err(Failure::Config(e.to_string())),
        Err(e) => return Err(Failure::Numerical(e.to_string())),
    };
    let op = bne_core::collision::CollisionOperator::new(table);
    let fast = op.assemble(&g, alpha, 1.0).map_err(|e| Failure::Numerical(e.to_string()))?;
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = fast.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let rel = diff / scale.max(f64::MIN_POSITIVE);
    println!("max |Q_fast - Q_direct| = {diff:.3e}, relative {rel:.3e} (tolerance {ORACLE_TOL:.0e})");
    if rel <= ORACLE_TOL {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("oracle mismatch: relative error {rel:.3e}")))
    }
}
