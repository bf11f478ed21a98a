//! Drivers: the time loop with its recorder, and the residual protocol.

use bne_core::collision::CollisionOperator;
use bne_core::diagnostics::{self, Entropy, Moments, Samples};
use bne_core::dynamics::{Flags, Integrator, SimState, Solver};
use bne_core::equilibrium::{classify, EquilibriumState};
use bne_core::error::{DynamicsError, EquilibriumError};
use bne_core::frame::Frame;
use bne_core::grid::GridSpec;
use bne_core::kernel::KernelTable;
use bne_core::stats::ParticleStatistics;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Resolved, SimConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    pub(crate) fn num(e: impl std::fmt::Display) -> Self {
        RunError::Numerical(e.to_string())
    }
}

/// One row of the diagnostic time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    pub rho: f64,
    pub u: Vec<f64>,
    pub e: f64,
    #[serde(rename = "Ec")]
    pub ec: f64,
    pub entropy: Option<f64>,
    pub entropy_defined: bool,
    /// Nodes with `f < 0` entering the entropy through `f ln|f|`.
    pub negative_nodes: usize,
    /// Time derivative of the entropy along the collision term.
    pub dissipation: Option<f64>,
    pub lp1: f64,
    pub lp2: f64,
    pub linf: f64,
    pub max_f: f64,
    /// `‖Q_α(f)‖_ℓ∞` at this state, scaled by `c`.
    pub residual: Option<f64>,
    /// `‖f − f∞‖_ℓ¹` against the limit state of the initial moments.
    pub relax_error: Option<f64>,
    pub omega: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowUp { step: usize, t: f64, sup_norm: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub frame: Frame,
    /// `f` at the frame's velocity nodes.
    pub f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: Outcome,
    pub hbar: Option<f64>,
    pub hbar_star: Option<f64>,
    pub limit: Option<EquilibriumState>,
    pub final_state: SimState,
}

impl RunRecord {
    pub fn blew_up(&self) -> bool {
        matches!(self.outcome, Outcome::BlowUp { .. })
    }
}

/// Everything needed to step a configuration.
pub struct Setup {
    pub resolved: Resolved,
    pub solver: Solver,
    pub initial: SimState,
    /// Limit state predicted from the discrete initial moments.
    pub limit: Option<EquilibriumState>,
    pub integrator: Integrator,
}

impl Setup {
    pub fn new(config: &SimConfig) -> Result<Self, RunError> {
        let resolved = config.resolve()?;
        let table = config.build_table(&resolved.grid).map_err(RunError::num)?;
        Self::with_table(resolved, table)
    }

    /// Same as [`Setup::new`] with a prebuilt (for example cached) table.
    pub fn with_table(resolved: Resolved, table: KernelTable) -> Result<Self, RunError> {
        let c = &resolved.config;
        if table.grid != resolved.grid {
            return Err(RunError::Numerical("kernel table was built for a different grid".into()));
        }
        let mut op = CollisionOperator::new(table);
        op.blowup_bound = c.blowup_bound;
        let stats = resolved.stats;
        let solver = Solver { op, stats, c: c.c, dt: c.dt, rescaling: c.rescaling };
        let grid = &resolved.grid;
        let profile = c.ic.profile();
        let m0 = profile.moments(c.dim, &stats).map_err(RunError::num)?;
        let frame = if c.rescaling {
            let mut flags = Flags::default();
            let omega = solver.thermal_speed(m0.rho, m0.u, m0.e, 1.0, &mut flags).map_err(RunError::num)?;
            Frame::rescaled(c.dim, c.l, m0.u, omega)
        } else {
            Frame::classical(c.dim, c.l)
        };
        let state = profile.state(c.dim, &stats).map_err(RunError::num)?;
        let f0 = state.discretize(grid, &frame).map_err(RunError::num)?;
        let initial = solver.initial_state(frame, &f0);
        let limit = classify(&initial.moments, &stats).ok();
        let integrator = c.integrator.into();
        Ok(Setup { resolved, solver, initial, limit, integrator })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.resolved.grid
    }

    pub fn stats(&self) -> &ParticleStatistics {
        &self.resolved.stats
    }

    /// Diagnostics of `state`; `collision` is `c_pre Q` evaluated on it.
    pub fn record(&self, state: &SimState, collision: Option<&[f64]>) -> Record {
        let grid = self.grid();
        let frame = &state.frame;
        let alpha = self.stats().alpha();
        let smp = Samples::from_rescaled(grid, frame, &state.g);
        let k = frame.density_factor();
        let (entropy, negative_nodes, defined) = match diagnostics::entropy(grid, frame, &state.g, alpha) {
            Entropy::Defined { value, negative } => (Some(value), negative, true),
            Entropy::Undefined { .. } => (None, smp.f.iter().filter(|&&f| f < 0.0).count(), false),
        };
        let df: Option<Vec<f64>> = collision.map(|q| q.iter().map(|x| k * x).collect());
        let dissipation = df.as_ref().and_then(|d| smp.entropy_dissipation(d, alpha));
        let residual = df.as_ref().map(|d| diagnostics::linf_residual(d));
        let relax_error = self
            .limit
            .as_ref()
            .and_then(|l| l.discretize(grid, frame).ok())
            .map(|d| smp.relaxation_error(&d.f));
        let m: Moments = state.moments;
        Record {
            step: state.step,
            t: state.time,
            rho: m.rho,
            u: m.u[..grid.dim].to_vec(),
            e: m.e,
            ec: m.ec,
            entropy,
            entropy_defined: defined,
            negative_nodes,
            dissipation,
            lp1: smp.lp_norm(1.0),
            lp2: smp.lp_norm(2.0),
            linf: smp.lp_norm(f64::INFINITY),
            max_f: smp.f.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
            residual,
            relax_error,
            omega: frame.omega,
            flags: flag_names(&state.flags),
        }
    }

    /// Runs to `t_final`, recording every `record_every` steps and taking
    /// snapshots at the configured times. Blow-up ends the run early with the
    /// data gathered so far.
    pub fn run(&self) -> RunRecord {
        self.run_with(|_| {})
    }

    /// [`Setup::run`] with a callback per record (progress reporting).
    pub fn run_with(&self, mut on_record: impl FnMut(&Record)) -> RunRecord {
        let c = &self.resolved.config;
        let steps = (c.t_final / c.dt).round() as usize;
        let mut records = Vec::new();
        let mut snapshots = Vec::new();
        let mut pending: Vec<f64> = c.snapshot_times.clone();
        pending.sort_by(f64::total_cmp);
        let mut state = self.initial.clone();
        let mut outcome = Outcome::Completed;
        let mut take_snapshots = |state: &SimState, pending: &mut Vec<f64>| {
            while pending.first().is_some_and(|&t| state.time >= t - 0.5 * c.dt) {
                pending.remove(0);
                snapshots.push(Snapshot {
                    step: state.step,
                    t: state.time,
                    frame: state.frame,
                    f: state.frame.from_rescaled(&state.g),
                });
            }
        };
        take_snapshots(&state, &mut pending);
        for _ in 0..steps {
            let recording = state.step % c.record_every == 0;
            match self.solver.step(&state, self.integrator) {
                Ok(out) => {
                    if recording {
                        let r = self.record(&state, Some(&out.collision));
                        on_record(&r);
                        records.push(r);
                    }
                    state = out.state;
                    take_snapshots(&state, &mut pending);
                }
                Err(e) => {
                    let mut r = self.record(&state, None);
                    outcome = match e {
                        DynamicsError::BlowUp { step, time, sup_norm, .. } => {
                            r.flags.push("blowup".into());
                            Outcome::BlowUp { step, t: time, sup_norm }
                        }
                        DynamicsError::NonFinite { step, time } => {
                            r.flags.push("blowup".into());
                            Outcome::BlowUp { step, t: time, sup_norm: f64::INFINITY }
                        }
                        other => {
                            r.flags.push("failed".into());
                            Outcome::Failed { message: other.to_string() }
                        }
                    };
                    on_record(&r);
                    records.push(r);
                    break;
                }
            }
        }
        if outcome == Outcome::Completed {
            let q = self.solver.collision(&state).ok();
            let r = self.record(&state, q.as_deref());
            on_record(&r);
            records.push(r);
        }
        RunRecord {
            records,
            snapshots,
            outcome,
            hbar: self.stats().is_quantum().then_some(self.stats().hbar),
            hbar_star: self.resolved.hbar_star,
            limit: self.limit,
            final_state: state,
        }
    }
}

fn flag_names(f: &Flags) -> Vec<String> {
    let mut out = Vec::new();
    for (on, name) in [
        (f.saturated, "saturated"),
        (f.undetermined, "undetermined"),
        (f.omega_floored, "omega_floored"),
        (f.condensate, "condensate"),
    ] {
        if on {
            out.push(name.to_string());
        }
    }
    out
}

/// Residual `‖Q_α(f_h∞)‖_ℓ∞` of one grid in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// In velocity variables, `μ² s^{d−γ} max|Q_{α_eff}(G)|` with `c = 1`.
    pub phys: f64,
    /// `max|Q_{α_eff}(G)|` on the rescaled samples.
    pub raw: f64,
    pub omega: f64,
}

/// Residual protocol on a resolved configuration: discretize the initial
/// profile, take its discrete moments (snapping `u` to the exact mean
/// velocity when rescaling), build the predicted limit state, discretize it
/// in its own frame and evaluate the collision operator on it.
pub fn residual(resolved: &Resolved, table: KernelTable) -> Result<Residual, RunError> {
    let c = &resolved.config;
    let grid = &resolved.grid;
    let stats = resolved.stats;
    let profile = c.ic.profile();
    let exact = profile.moments(c.dim, &stats).map_err(RunError::num)?;
    let frame0 =
        if c.rescaling { Frame::rescaled(c.dim, c.l, exact.u, 1.0) } else { Frame::classical(c.dim, c.l) };
    let f0 = profile.state(c.dim, &stats).map_err(RunError::num)?.discretize(grid, &frame0).map_err(RunError::num)?;
    let mut m = diagnostics::moments(grid, &frame0, &frame0.to_rescaled(&f0));
    if c.rescaling {
        m.u = exact.u;
    }
    let limit = classify(&m, &stats).map_err(RunError::num)?;
    let frame = if c.rescaling {
        let d = c.dim as f64;
        let omega = match limit {
            EquilibriumState::Quantum { t, .. } | EquilibriumState::Condensate { t, .. } => t.sqrt(),
            EquilibriumState::Classical { t, u, .. } => {
                let u2: f64 = u.iter().map(|x| x * x).sum();
                (t + u2 / d).sqrt()
            }
            _ => return Err(RunError::Numerical(format!("no regular limit state: {limit:?}"))),
        };
        Frame::rescaled(c.dim, c.l, m.u, omega)
    } else {
        frame0
    };
    let f_inf = limit.discretize(grid, &frame).map_err(|e| match e {
        EquilibriumError::SingularNode { index } => {
            RunError::Numerical(format!("NaN hazard: node {index} sits on the condensate singularity"))
        }
        other => RunError::num(other),
    })?;
    let g = frame.to_rescaled(&f_inf.f);
    let (alpha_eff, _) = frame.scale_factors(stats.alpha(), table.gamma, 1.0);
    let gamma = table.gamma;
    let op = CollisionOperator::new(table);
    let q = op.assemble(&g, alpha_eff, 1.0).map_err(RunError::num)?;
    let raw = diagnostics::linf_residual(&q);
    if !raw.is_finite() {
        return Err(RunError::Numerical("NaN hazard: residual is not finite".into()));
    }
    let s = frame.scale();
    let phys = frame.mu * frame.mu * s.powf(c.dim as f64 - gamma) * raw;
    Ok(Residual { phys, raw, omega: frame.omega })
}
