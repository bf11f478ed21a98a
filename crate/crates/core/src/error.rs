use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("points per dimension must be even and at least 4, got {0}")]
    PointCount(usize),
    #[error("box half-width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("truncation ratio R/S must be at least 1, got {0}")]
    TruncRatio(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel requires a {expected}D grid, got {got}D")]
    Dimension { expected: usize, got: usize },
    #[error("angular node count must be positive")]
    NodeCount,
    #[error("quadrature order must be at least 8, got {0}")]
    QuadOrder(usize),
    #[error("quadrature did not converge: doubling the order changed an entry by {change:e}")]
    NotConverged { change: f64 },
    #[error("imaginary part {0:e} of a kernel mode exceeds 1e-10")]
    ImaginaryPart(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error("field length {got} does not match grid size {expected}")]
    Shape { expected: usize, got: usize },
    #[error("kernel table and grid disagree")]
    GridMismatch,
    #[error("numerical blow-up: sup|G| = {sup_norm:e} exceeds {threshold:e}")]
    BlowUp { sup_norm: f64, threshold: f64 },
    #[error("direct oracle refuses n = {n} in {dim}D (too expensive)")]
    OracleTooLarge { dim: usize, n: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("mass and energy (or temperature) must be positive and finite")]
    NonPositiveMoments,
    #[error("Planck constant must be positive and finite")]
    NonPositiveHbar,
    #[error("root bracket could not be established for {0}")]
    Bracket(&'static str),
    #[error("root finder exceeded {0} iterations")]
    Iterations(usize),
    #[error("special function argument out of range: {0}")]
    Domain(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("no limit state is predicted for these moments (Fermi gas beyond saturation)")]
    Undetermined,
    #[error("grid node {index} sits on the singular point of a z = 1 Bose state (NaN hazard)")]
    SingularNode { index: usize },
}

/// Failures of the rescaled time integration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("blow-up at step {step} (t = {time}): sup|G| = {sup_norm:e} exceeds {threshold:e}")]
    BlowUp {
        step: usize,
        time: f64,
        sup_norm: f64,
        threshold: f64,
    },
    #[error("non-finite value in the solution at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("moment failure: {0}")]
    Moments(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
