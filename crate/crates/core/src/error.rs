use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstitutiveError {
    #[error("chi = {0} lies outside [0, 1]")]
    ChiOutOfRange(f64),
    #[error("unknown h family `{0}` (expected `atan` or `tanh`)")]
    UnknownFamily(String),
    #[error("invalid h specification: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("psi inversion did not converge for e = {e}, chi = {chi} after {iterations} iterations")]
    PsiInverseNotConverged { e: f64, chi: f64, iterations: usize },
    #[error("xi = {xi} is not in beta({chi})")]
    NotInGraph { chi: f64, xi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("linear solve did not reach tolerance: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error("invalid initial data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
}

/// A violated [`crate::stepper::State`] invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state fields live on different grids")]
    GridMismatch,
    #[error("{field} is not finite at node {node}")]
    NonFinite { field: &'static str, node: usize },
    #[error("e != psi(theta, chi) at node {node} (deviation {deviation:e})")]
    EnergyRelation { node: usize, deviation: f64 },
    #[error("p != u (1 + chi) at node {node} (deviation {deviation:e})")]
    PressureRelation { node: usize, deviation: f64 },
    #[error("chi = {value} outside [0, 1] at node {node}")]
    PhaseRange { node: usize, value: f64 },
    #[error("u = {value} is not positive at node {node}")]
    NonPositiveDensity { node: usize, value: f64 },
    #[error("xi not in beta(chi) at node {node} (violation {violation:e})")]
    BetaInclusion { node: usize, violation: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepperError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input state rejected: {0}")]
    InvalidState(#[from] StateError),
    #[error("linear algebra failure: {0}")]
    Linear(#[from] GridError),
    #[error("constitutive failure: {0}")]
    Constitutive(#[from] ConstitutiveError),
    #[error("density lost positivity at node {node} (u = {value}); operator invariants are broken")]
    Positivity { node: usize, value: f64 },
    #[error("phase update did not converge after {iterations} iterations (residual {residual:e})")]
    PhaseNotConverged { iterations: usize, residual: f64 },
    #[error("energy update did not converge after {iterations} iterations (residual {residual:e})")]
    EnergyNotConverged { iterations: usize, residual: f64 },
    #[error("coupling loop did not converge after {iterations} sweeps (change {change:e})")]
    CouplingNotConverged { iterations: usize, change: f64 },
    #[error("time step fell below dt_min = {dt_min:e} at t = {t}: {last}")]
    DtUnderflow { t: f64, dt_min: f64, last: Box<StepperError> },
    #[error("t_end = {t_end} precedes the initial time {t0}")]
    BadHorizon { t0: f64, t_end: f64 },
}

impl StepperError {
    /// Subsolve failures that a smaller time step can cure.
    pub fn is_recoverable(&self) -> bool {
        matches!(
            self,
            StepperError::PhaseNotConverged { .. }
                | StepperError::EnergyNotConverged { .. }
                | StepperError::CouplingNotConverged { .. }
                | StepperError::Linear(GridError::NotPositiveDefinite { .. })
                | StepperError::Linear(GridError::NotConverged { .. })
                | StepperError::Constitutive(ConstitutiveError::PsiInverseNotConverged { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("decay fit needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate series: phi1 = {value} at t = {t} is not positive")]
    Degenerate { t: f64, value: f64 },
    #[error("pressure must be positive, got {0}")]
    NonPositivePressure(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("snapshot does not match the grid: {0}")]
    GridMismatch(String),
}

impl ScenarioError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScenarioError::Io { path: path.into(), source }
    }
}

/// A failed [`crate::stepper::Stepper::run`], carrying the last accepted state.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step} failed at t = {t}: {source}", t = state.t)]
pub struct RunError {
    pub step: usize,
    pub state: Box<crate::stepper::State>,
    #[source]
    pub source: StepperError,
}

/// Failure of a scenario run, split by the CLI into validation and solver failures.
#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("initial data: {0}")]
    Init(#[from] InitError),
    #[error("solver setup: {0}")]
    Stepper(#[from] StepperError),
    #[error("{source}")]
    Solver {
        #[source]
        source: RunError,
        /// Snapshot of the last accepted state, when it could be written.
        dump: Option<PathBuf>,
    },
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

impl DriverError {
    /// Errors caused by the scenario document or its data rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            DriverError::Scenario(ScenarioError::Io { .. }) => false,
            DriverError::Scenario(_) => true,
            DriverError::Init(InitError::InvalidData(_)) => true,
            DriverError::Stepper(StepperError::InvalidConfig(_)) => true,
            _ => false,
        }
    }
}
