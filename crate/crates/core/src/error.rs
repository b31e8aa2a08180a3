use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("momentum must be positive, got k = {0}")]
    NonPositiveMomentum(f64),
    #[error("momentum k = {k} is below the solver floor {floor}")]
    MomentumBelowFloor { k: f64, floor: f64 },
    #[error("{0} has no closed-form scattering solution; use solve_generic")]
    NoClosedForm(String),
    #[error("{0} contains a point interaction and cannot be integrated as an ODE")]
    PointInteraction(String),
    #[error("ODE step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("ODE exceeded {steps} steps at x = {x}")]
    TooManySteps { steps: usize, x: f64 },
    #[error("degenerate asymptotics: |a| = {magnitude:e} at x_L = {x_left}")]
    DegenerateAsymptotics { magnitude: f64, x_left: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no cached scattering wave for momentum k = {0}")]
    MissingWave(f64),
    #[error("kernel assembly: {0}")]
    Assembly(String),
    #[error("smearing window [{lo}, {hi}] overlaps the potential region [-{radius}, {radius}]")]
    SupportOverlap { lo: f64, hi: f64, radius: f64 },
    #[error("shift {shift} is not below the spectrum after {attempts} attempts")]
    ShiftNotBelowSpectrum { shift: f64, attempts: usize },
    #[error("inverse iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = core::result::Result<T, Error>;
