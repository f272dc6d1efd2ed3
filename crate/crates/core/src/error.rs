use thiserror::Error;

use crate::equilibria::EquilibriumReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative propagation distance {0} (scatterer positions must be strictly increasing)")]
    NegativeDistance(f64),

    #[error("singular boundary condition: |m22| = {0:e} of the total transfer matrix")]
    SingularBoundary(f64),

    #[error("equal wavenumbers required, got k_y = {k_y} and k_z = {k_z}")]
    WavenumberMismatch { k_y: f64, k_z: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error(
        "separation violation at t = {time}: gap {gap:e} between scatterers {left} and {} is below {min:e}",
        left + 1
    )]
    SeparationViolation {
        time: f64,
        left: usize,
        gap: f64,
        min: f64,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<EquilibriumReport>,
    },

    #[error("inconsistent linearization: {0}")]
    InconsistentLinearization(String),

    #[error("unstable normal mode: squared frequency {omega_sq:e} < 0 (growth rate {growth_rate:e})")]
    UnstableMode { omega_sq: f64, growth_rate: f64 },

    #[error("no self-consistent lattice: radicand {0:e} is negative")]
    NoLattice(f64),

    #[error("no trapping position: {0}")]
    NoTrap(String),

    #[error("closed-form denominator vanishes (|den| = {0:e})")]
    SingularDenominator(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::WavenumberMismatch { .. } | Error::NegativeDistance(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
