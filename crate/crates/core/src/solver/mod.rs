//! Newton's method, flexible GMRES, Chebyshev–Jacobi smoothing and the
//! hp-multigrid preconditioner.

mod krylov;
mod multigrid;
mod newton;
mod smoother;

pub use krylov::{conjugate_gradient, fgmres, CgReport, FgmresConfig, FgmresReport};
pub use multigrid::{coarse_solve, CoarseReport, MgConfig, MgHierarchy, MgLevel, MgPrecision, MgSolver};
pub use newton::{newton_solve, NewtonConfig, NewtonReport, NewtonSystem};
pub use smoother::{estimate_eigenvalues, ChebyshevSmoother, EigenEstimate};

use crate::mesh::MeshError;
use crate::operator::OperatorError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("GMRES breakdown after {iterations} iterations (residual {residual:e})")]
    Breakdown { iterations: usize, residual: f64 },
    #[error("GMRES did not converge within {restarts} restarts (residual {residual:e})")]
    MaxRestarts { restarts: usize, residual: f64 },
    #[error("coarse matrix is singular")]
    SingularCoarseMatrix,
    #[error("coarse CG did not converge in {iterations} iterations (relative residual {relative:e})")]
    CgNoConvergence { iterations: usize, relative: f64 },
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("linear solve failed in Newton step {step}: {source}")]
    LinearSolveFailure { step: usize, source: Box<SolverError> },
    #[error("vector has length {found}, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A linear map `y = A x`; implemented by closures.
pub trait LinearMap<T = f64> {
    fn apply(&mut self, x: &[T], y: &mut [T]) -> Result<(), SolverError>;
}

impl<T, F> LinearMap<T> for F
where
    F: FnMut(&[T], &mut [T]) -> Result<(), SolverError>,
{
    fn apply(&mut self, x: &[T], y: &mut [T]) -> Result<(), SolverError> {
        self(x, y)
    }
}

/// The identity map, a no-op preconditioner.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Copy> LinearMap<T> for Identity {
    fn apply(&mut self, x: &[T], y: &mut [T]) -> Result<(), SolverError> {
        y.copy_from_slice(x);
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
