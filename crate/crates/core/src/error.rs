use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("map degree must be at least two, got {0}")]
    DegreeTooSmall(usize),
    #[error("degenerate lift: numerator and denominator share a projective root")]
    DegenerateLift,
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: u64, cap: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parametric resultant vanished identically")]
    DegenerateResultant,
    #[error(
        "root finder did not certify all roots at {precision} bits (worst radius {worst_radius:e})"
    )]
    RootsNotCertified {
        precision: u32,
        worst_radius: f64,
        best: Box<crate::mahler::RootSet>,
    },
    #[error("canonical height tolerance {tol:e} unreachable after {iterations} iterations (bound {bound:e})")]
    HeightTolerance {
        tol: f64,
        iterations: usize,
        value: f64,
        bound: f64,
    },
    #[error("quadrature did not reach tolerance {tol:e} within {evaluations} evaluations (estimate {error:e})")]
    Quadrature {
        tol: f64,
        evaluations: usize,
        value: f64,
        error: f64,
    },
}
