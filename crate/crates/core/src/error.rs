use crate::model::SystemKind;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{system}: decay channel W{from}{to} is not allowed by the level topology")]
    ForbiddenChannel {
        system: SystemKind,
        from: usize,
        to: usize,
    },

    #[error("decay rate W{from}{to} = {value} must be finite and nonnegative")]
    InvalidRate { from: usize, to: usize, value: f64 },

    #[error("{system}: threshold {threshold} is not positive, threshold factor is undefined")]
    DegenerateThreshold { system: SystemKind, threshold: f64 },

    #[error(
        "{system}: pole pair is degenerate at omega_c = {omega_c} (threshold = {threshold}); \
         the two-resonance split is singular exactly at the threshold"
    )]
    DegeneratePole {
        system: SystemKind,
        omega_c: f64,
        threshold: f64,
    },

    #[error("{system}: closed-form denominator is numerically zero at delta_p = {delta_p}")]
    NearSingularDenominator { system: SystemKind, delta_p: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too narrow: the absorption maximum sits on the grid boundary")]
    GridTooNarrow,

    #[error("steady-state system is singular (pivot {pivot:e} in column {column})")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
