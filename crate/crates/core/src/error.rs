use thiserror::Error;

use crate::angles::Violation;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inadmissible splitting: {}", render_violations(.0))]
    Inadmissible(Vec<Violation>),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("continuation failed on branch {branch} at s = {s:.6e} (step {step:.3e})")]
    Continuation { branch: usize, s: f64, step: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("newton iteration failed after {iterations} iterations (residual {residual:.3e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("contraction failed after {iterations} iterations (residual {residual:.3e})")]
    Contraction { iterations: usize, residual: f64 },

    #[error("eigen-solve failed: {0}")]
    Eigen(String),

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

impl Error {
    /// True for failures of an iterative or numerical solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_) | Error::Inadmissible(_) | Error::ShapeMismatch(_)
        )
    }
}

fn render_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
