use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index must be positive everywhere (found {0})")]
    NonPositiveIndex(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("Hankel function underflows the scaled representation at w = {0}")]
    NearPole(String),
    #[error("argument outside the supported domain: {0}")]
    DomainError(String),
    #[error("secular function evaluated at a pole: {0}")]
    PoleProximity(String),
    #[error("zero on or near the contour (step floor reached at z = {0})")]
    BoundaryZero(String),
    #[error("winding number {0} is not close to an integer")]
    AmbiguousWinding(f64),
    #[error("Newton iteration diverged from {0}")]
    NewtonDiverged(String),
    #[error("square-root branch point at the evaluation point")]
    BranchPoint,
    #[error("no plasmon solution: {0}")]
    NoSolution(String),
    #[error("division by a vanishing principal symbol (|e1| = {0:e})")]
    DivisionNearZero(f64),
    #[error("no sign change in the bracket [{0}, {1}]")]
    NoBracket(f64, f64),
    #[error("plasmon fiber is empty (non-plasmonic coefficients)")]
    EmptyFiber,
    #[error("scan incomplete: mode {m} beyond the cutoff has a root with Re = {re}")]
    IncompleteScan { m: i64, re: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
