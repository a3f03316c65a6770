use crate::model::Branch;

/// Failure classes shared across the crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature tolerance not met: |err| ~ {error_estimate:.3e} after {subdivisions} panels (partial value {value:.6e})")]
    ToleranceNotMet {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand evaluated to a non-finite value at x = {x:.17e}")]
    NonFiniteIntegrand { x: f64 },

    #[error("invalid singular bracket: {0}")]
    BracketInvalid(String),

    #[error("no sign change on [{lo:.6e}, {hi:.6e}]: g(lo) = {g_lo:.3e}, g(hi) = {g_hi:.3e}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("root finding did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("energy {energy:.6e} outside the admissible range for the {branch:?} branch at omega = {omega}")]
    EnergyOutOfRange {
        branch: Branch,
        omega: f64,
        energy: f64,
    },

    #[error("omega = {omega} not admissible for the {branch:?} branch at L = {l} (allowed: ({lo:.6}, 1))")]
    FrequencyOutOfRange {
        branch: Branch,
        omega: f64,
        l: f64,
        lo: f64,
    },

    #[error("finite-difference step underflow near the homoclinic energy")]
    StepUnderflow,

    #[error("degenerate orbit: amplitude {0:.3e} below resolution threshold")]
    DegenerateOrbit(f64),

    #[error("profile resample failed: {0}")]
    ResampleFailure(String),

    #[error("line search stalled: step factor fell below 2^-30")]
    LineSearchStall,

    #[error("Newton iteration did not converge within {0} iterations")]
    MaxIterations(usize),

    #[error("singular linear solve: {0}")]
    SingularSolve(String),

    #[error("input violates the required symmetry: {0}")]
    SymmetryViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
