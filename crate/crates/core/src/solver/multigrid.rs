use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Dyn, LU};

use super::krylov::{conjugate_gradient, fgmres, FgmresConfig};
use super::newton::NewtonSystem;
use super::smoother::{estimate_eigenvalues, ChebyshevSmoother, EigenEstimate};
use super::SolverError;
use crate::constitutive::Material;
use crate::scalar::Real;
use crate::mesh::{degree_ladder, FeLevel, Transfer};
use crate::operator::{ElasticOperator, LaneReal, OperatorConfig};

/// Arithmetic of the V-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MgPrecision {
    Single,
    Double,
}

impl fmt::Display for MgPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MgPrecision::Single => "single",
            MgPrecision::Double => "double",
        })
    }
}

impl FromStr for MgPrecision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "f32" => Ok(MgPrecision::Single),
            "double" | "f64" => Ok(MgPrecision::Double),
            _ => Err(format!("unknown precision `{s}` (expected single or double)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgConfig {
    /// Chebyshev degree, i.e. operator applications per smoothing step.
    pub smoothing_degree: usize,
    /// Ratio of the largest to the smallest smoothed eigenvalue.
    pub smoothing_range: f64,
    /// Factor applied to the estimated largest eigenvalue.
    pub eig_safety: f64,
    pub lanczos_steps: usize,
    pub seed: u64,
    pub precision: MgPrecision,
    /// Below this many unknowns the coarse level is factorized densely.
    pub direct_limit: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for MgConfig {
    fn default() -> Self {
        MgConfig {
            smoothing_degree: 6,
            smoothing_range: 15.0,
            eig_safety: 1.2,
            lanczos_steps: 20,
            seed: 42,
            precision: MgPrecision::Single,
            direct_limit: 2000,
            cg_rel_tol: 1e-4,
            cg_max_iter: 500,
        }
    }
}

/// How the coarsest level was solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoarseReport {
    Direct,
    Cg { iterations: usize, relative: f64 },
}

#[derive(Debug, Clone)]
enum CoarseSolver {
    Dense(LU<f64, Dyn, Dyn>),
    Cg(Vec<f64>),
}

impl CoarseSolver {
    fn new(op: &ElasticOperator, cfg: &MgConfig) -> Result<Self, SolverError> {
        if op.n_dofs() < cfg.direct_limit {
            let k = op.assemble_matrix_oracle(cfg.direct_limit)?;
            let lu = k.lu();
            if !lu.is_invertible() {
                return Err(SolverError::SingularCoarseMatrix);
            }
            Ok(CoarseSolver::Dense(lu))
        } else {
            let d = op.compute_diagonal()?.diagonal;
            Ok(CoarseSolver::Cg(d.iter().map(|v| 1.0 / v).collect()))
        }
    }

    fn solve(&self, op: &ElasticOperator, b: &[f64], cfg: &MgConfig) -> Result<(Vec<f64>, CoarseReport), SolverError> {
        match self {
            CoarseSolver::Dense(lu) => {
                let x = lu.solve(&DVector::from_column_slice(b)).ok_or(SolverError::SingularCoarseMatrix)?;
                Ok((x.as_slice().to_vec(), CoarseReport::Direct))
            }
            CoarseSolver::Cg(inv_diag) => {
                let mut apply = |x: &[f64], y: &mut [f64]| op.apply_tangent_into(x, y).map_err(SolverError::from);
                let (x, rep) = conjugate_gradient(&mut apply, inv_diag, b, cfg.cg_rel_tol, cfg.cg_max_iter)?;
                Ok((x, CoarseReport::Cg { iterations: rep.iterations, relative: rep.relative }))
            }
        }
    }
}

/// Solves the coarse problem `K x = b` of a linearized operator: dense LU
/// below `cfg.direct_limit` unknowns, Jacobi-preconditioned CG otherwise.
pub fn coarse_solve(op: &ElasticOperator, b: &[f64], cfg: &MgConfig) -> Result<(Vec<f64>, CoarseReport), SolverError> {
    CoarseSolver::new(op, cfg)?.solve(op, b, cfg)
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
pub struct MgLevel {
    pub op: ElasticOperator,
    /// Transfer to the next coarser level.
    pub transfer: Option<Transfer>,
    pub eigen: Option<EigenEstimate>,
    /// Unconstrained unknowns with a non-positive diagonal at the last update.
    pub nonpositive_diagonal: usize,
    single: Option<ChebyshevSmoother<f32>>,
    double: Option<ChebyshevSmoother<f64>>,
}

impl MgLevel {
    pub fn degree(&self) -> usize {
        self.op.level().degree()
    }
}

/// Element type of a V-cycle.
pub trait MgReal: LaneReal {
    #[doc(hidden)]
    fn smoother(level: &MgLevel) -> &ChebyshevSmoother<Self>;
}

impl MgReal for f32 {
    fn smoother(level: &MgLevel) -> &ChebyshevSmoother<f32> {
        level.single.as_ref().expect("smoother built at update")
    }
}

impl MgReal for f64 {
    fn smoother(level: &MgLevel) -> &ChebyshevSmoother<f64> {
        level.double.as_ref().expect("smoother built at update")
    }
}

/// hp-multigrid hierarchy, finest level first: the polynomial degree is
/// halved down to 1, then the mesh is coarsened to the initial grid.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    pub levels: Vec<MgLevel>,
    pub config: MgConfig,
    coarse: Option<CoarseSolver>,
}

impl MgHierarchy {
    pub fn new(fine: FeLevel, material: Material, op_config: OperatorConfig, config: MgConfig) -> Result<Self, SolverError> {
        let mut spaces = vec![fine];
        for &q in &degree_ladder(spaces[0].degree())[1..] {
            let prev = spaces.last().unwrap();
            let mut lvl = FeLevel::new(&prev.mesh, q, &prev.mapping)?;
            lvl.copy_constraint_faces(prev);
            spaces.push(lvl);
        }
        while let Some(mesh) = spaces.last().unwrap().mesh.coarsened() {
            let prev = spaces.last().unwrap();
            let mut lvl = FeLevel::new(&mesh, 1, &prev.mapping)?;
            lvl.copy_constraint_faces(prev);
            spaces.push(lvl);
        }
        let mut levels = Vec::with_capacity(spaces.len());
        for i in 0..spaces.len() {
            let transfer = match spaces.get(i + 1) {
                Some(c) => Some(Transfer::new(&spaces[i], c)?),
                None => None,
            };
            let op = ElasticOperator::new(spaces[i].clone(), material.clone(), op_config)?;
            levels.push(MgLevel { op, transfer, eigen: None, nonpositive_diagonal: 0, single: None, double: None });
        }
        Ok(MgHierarchy { levels, config, coarse: None })
    }

    pub fn fine(&self) -> &ElasticOperator {
        &self.levels[0].op
    }

    pub fn fine_mut(&mut self) -> &mut ElasticOperator {
        &mut self.levels[0].op
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Degrees and unknown counts of the levels, finest first.
    pub fn describe(&self) -> Vec<(usize, usize, usize)> {
        self.levels.iter().map(|l| (l.degree(), l.op.level().n_elements(), l.op.n_dofs())).collect()
    }

    /// Linearizes every level at `u_k` (carried down by nodal interpolation)
    /// and rebuilds diagonals, eigenvalue estimates, smoothers and the coarse solver.
    pub fn update(&mut self, u_k: &[f64]) -> Result<(), SolverError> {
        let cfg = self.config;
        let mut u = u_k.to_vec();
        let last = self.levels.len() - 1;
        for (i, level) in self.levels.iter_mut().enumerate() {
            level.op.update_linearization(&u)?;
            if i < last {
                let report = level.op.compute_diagonal()?;
                level.nonpositive_diagonal = report.nonpositive.len();
                let inv: Vec<f64> = report.diagonal.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
                let op = &level.op;
                let mut apply = |x: &[f64], y: &mut [f64]| op.apply_tangent_into(x, y).map_err(SolverError::from);
                let est = estimate_eigenvalues(&mut apply, &inv, cfg.lanczos_steps, cfg.seed)?;
                level.single = Some(ChebyshevSmoother::new(&inv, &est, cfg.smoothing_degree, cfg.smoothing_range, cfg.eig_safety)?);
                level.double = Some(ChebyshevSmoother::new(&inv, &est, cfg.smoothing_degree, cfg.smoothing_range, cfg.eig_safety)?);
                level.eigen = Some(est);
                u = level.transfer.as_ref().unwrap().interpolate_down(&u);
            }
        }
        self.coarse = Some(CoarseSolver::new(&self.levels[last].op, &cfg)?);
        Ok(())
    }

    /// One V-cycle on `K x = b` from a zero initial guess.
    pub fn vcycle<T: MgReal>(&self, b: &[T], x: &mut [T]) -> Result<(), SolverError> {
        if self.coarse.is_none() {
            return Err(crate::operator::OperatorError::StaleCache.into());
        }
        self.cycle(0, b, x)
    }

    fn cycle<T: MgReal>(&self, l: usize, b: &[T], x: &mut [T]) -> Result<(), SolverError> {
        let level = &self.levels[l];
        let op = &level.op;
        let Some(transfer) = &level.transfer else {
            let b64: Vec<f64> = b.iter().map(|&v| Real::to_f64(v)).collect();
            let (x64, _) = self.coarse.as_ref().unwrap().solve(op, &b64, &self.config)?;
            for (xi, v) in x.iter_mut().zip(x64) {
                *xi = <T as Real>::from_f64(v);
            }
            return Ok(());
        };
        let mut apply = |x: &[T], y: &mut [T]| op.apply_tangent_into(x, y).map_err(SolverError::from);
        let smoother = T::smoother(level);
        smoother.smooth(&mut apply, x, b, true)?;
        let mut r = vec![T::zero(); b.len()];
        apply(x, &mut r)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = *bi - *ri;
        }
        let mut rc = transfer.restrict(&r);
        let coarse = &self.levels[l + 1].op;
        coarse.level().dirichlet.zero(&mut rc);
        let mut xc = vec![T::zero(); rc.len()];
        self.cycle(l + 1, &rc, &mut xc)?;
        let mut e = transfer.prolongate(&xc);
        op.level().dirichlet.zero(&mut e);
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += *ei;
        }
        smoother.smooth(&mut apply, x, b, false)
    }

    /// The V-cycle as a double-precision preconditioner in the configured precision.
    pub fn precondition(&self, r: &[f64], z: &mut [f64]) -> Result<(), SolverError> {
        match self.config.precision {
            MgPrecision::Double => self.vcycle(r, z),
            MgPrecision::Single => {
                let r32: Vec<f32> = r.iter().map(|&v| v as f32).collect();
                let mut z32 = vec![0.0f32; r.len()];
                self.vcycle(&r32, &mut z32)?;
                for (zi, v) in z.iter_mut().zip(z32) {
                    *zi = v as f64;
                }
                Ok(())
            }
        }
    }
}

/// Newton system of an elasticity problem: residual and tangent of the finest
/// level, FGMRES preconditioned by one V-cycle.
#[derive(Debug, Clone)]
pub struct MgSolver {
    pub hierarchy: MgHierarchy,
    pub fgmres: FgmresConfig,
    /// Skip the preconditioner (plain GMRES).
    pub unpreconditioned: bool,
}

impl MgSolver {
    pub fn new(hierarchy: MgHierarchy, fgmres: FgmresConfig) -> Self {
        MgSolver { hierarchy, fgmres, unpreconditioned: false }
    }

    /// Solves `K x = b` at the current linearization; returns the iteration count.
    pub fn solve_tangent(&self, b: &[f64], x: &mut [f64]) -> Result<usize, SolverError> {
        let op = self.hierarchy.fine();
        let mut a = |x: &[f64], y: &mut [f64]| op.apply_tangent_into(x, y).map_err(SolverError::from);
        let rep = if self.unpreconditioned {
            fgmres(&mut a, &mut super::Identity, b, x, &self.fgmres)?
        } else {
            let mut m = |r: &[f64], z: &mut [f64]| self.hierarchy.precondition(r, z);
            fgmres(&mut a, &mut m, b, x, &self.fgmres)?
        };
        Ok(rep.iterations)
    }
}

impl NewtonSystem for MgSolver {
    fn residual(&mut self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        Ok(self.hierarchy.fine().evaluate_residual(u)?)
    }

    fn linearize(&mut self, u: &[f64]) -> Result<(), SolverError> {
        self.hierarchy.update(u)
    }

    fn solve_linear(&mut self, rhs: &[f64]) -> Result<(Vec<f64>, usize), SolverError> {
        let mut x = vec![0.0; rhs.len()];
        let it = self.solve_tangent(rhs, &mut x)?;
        Ok((x, it))
    }
}
