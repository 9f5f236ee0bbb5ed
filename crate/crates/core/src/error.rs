use crate::constitutive::ConstitutiveError;
use crate::fastscalar::ScalarError;
use crate::mesh::MeshError;
use crate::operator::OperatorError;
use crate::solver::SolverError;
use crate::stability::StabilityError;
use crate::tensor::TensorError;

/// Any error raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
