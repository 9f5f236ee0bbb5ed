//! Matrix-free finite element kernels for finite-strain hyperelasticity.
//!
//! The crate is organized bottom-up:
//!
//! * [`scalar`] and [`tensor`]: precision-generic scalars, lane batches and 3×3 tensor algebra,
//! * [`fastscalar`]: stable and fast scalar kernels (`ln(1 + x)`, `J^(-2/3)`, `exp`),
//! * [`constitutive`]: material models, stresses, linearizations and per-point caches,
//! * [`stability`]: the single-versus-double precision stress sweep,
//! * [`mesh`]: structured hexahedral meshes, Lagrange bases, mappings and transfers,
//! * [`operator`]: matrix-free residual and tangent evaluation by sum factorization,
//! * [`solver`]: FGMRES, Chebyshev–Jacobi smoothing, hp-multigrid and Newton's method.

pub mod constitutive;
pub mod error;
pub mod fastscalar;
pub mod mesh;
pub mod operator;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod stability;
pub mod tensor;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/kernels.md")]
    struct Kernels;
    #[doc = include_str!("../../../book/src/materials.md")]
    struct Materials;
    #[doc = include_str!("../../../book/src/stability.md")]
    struct Stability;
    #[doc = include_str!("../../../book/src/operator.md")]
    struct Operator;
    #[doc = include_str!("../../../book/src/solver.md")]
    struct Solver;
}
