//! Deformed-cube benchmark problem: one face clamped, a uniform pressure on
//! the opposite face, applied in load increments.

use std::time::Instant;

use crate::constitutive::{Material, MaterialParams, ModelKind};
use crate::error::Result;
use crate::mesh::{build_cube, Deformation, Face, FeLevel, Mapping};
use crate::operator::{assemble_traction, OperatorConfig};
use crate::solver::{newton_solve, FgmresConfig, MgConfig, MgHierarchy, MgSolver, NewtonConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CubeProblem {
    pub n0: usize,
    pub refinements: u32,
    pub degree: usize,
    pub extent: f64,
    pub deformation: Deformation,
    pub model: ModelKind,
    pub params: MaterialParams,
    pub operator: OperatorConfig,
    /// Pressure on `load_face` in the units of the moduli (dead load on the reference face).
    pub pressure: f64,
    pub clamped_face: Face,
    pub load_face: Face,
    pub load_steps: usize,
    pub newton: NewtonConfig,
    pub fgmres: FgmresConfig,
    pub multigrid: MgConfig,
}

impl Default for CubeProblem {
    fn default() -> Self {
        CubeProblem {
            n0: 1,
            refinements: 2,
            degree: 2,
            extent: 1.0,
            deformation: Deformation::default(),
            model: ModelKind::Fiber,
            params: MaterialParams::aortic_media(),
            operator: OperatorConfig::default(),
            pressure: 4.0,
            clamped_face: Face::XMin,
            load_face: Face::XMax,
            load_steps: 4,
            newton: NewtonConfig::default(),
            fgmres: FgmresConfig::default(),
            multigrid: MgConfig::default(),
        }
    }
}

/// Outcome of one load increment.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadStep {
    pub step: usize,
    pub load_factor: f64,
    pub newton_iterations: usize,
    /// Residual norms, initial first.
    pub residuals: Vec<f64>,
    pub linear_iterations: Vec<usize>,
    /// Wall time per Newton step.
    pub step_seconds: Vec<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub n_dofs: usize,
    pub n_levels: usize,
    pub u: Vec<f64>,
    pub steps: Vec<LoadStep>,
}

impl CubeProblem {
    /// Finest level with the clamped face constrained.
    pub fn fine_level(&self) -> Result<FeLevel> {
        let mesh = build_cube(self.n0, self.refinements, self.extent)?;
        let mapping = Mapping::new(&mesh, self.degree, &self.deformation)?;
        let mut level = FeLevel::new(&mesh, self.degree, &mapping)?;
        level.clamp(&[self.clamped_face]);
        Ok(level)
    }

    /// Multigrid-preconditioned Newton system with the full load.
    pub fn build_solver(&self) -> Result<(MgSolver, Vec<f64>)> {
        let level = self.fine_level()?;
        let p = self.pressure;
        let load = assemble_traction(&level, self.load_face, |_, n| n.map(|v| -p * v));
        let material = Material::new(self.model, self.params)?;
        let hierarchy = MgHierarchy::new(level, material, self.operator, self.multigrid)?;
        Ok((MgSolver::new(hierarchy, self.fgmres), load))
    }

    /// Applies the pressure in `load_steps` equal increments, one Newton solve each.
    pub fn solve(&self) -> Result<SolveOutcome> {
        let (mut solver, load) = self.build_solver()?;
        let n = load.len();
        let steps = self.load_steps.max(1);
        let mut u = vec![0.0; n];
        let mut out = Vec::with_capacity(steps);
        for s in 1..=steps {
            let factor = s as f64 / steps as f64;
            solver.hierarchy.fine_mut().set_load(load.iter().map(|v| factor * v).collect())?;
            let start = Instant::now();
            let report = newton_solve(&mut solver, u, &self.newton)?;
            out.push(LoadStep {
                step: s,
                load_factor: factor,
                newton_iterations: report.iterations,
                residuals: report.residuals,
                linear_iterations: report.linear_iterations,
                step_seconds: report.step_seconds,
                seconds: start.elapsed().as_secs_f64(),
            });
            u = report.u;
        }
        Ok(SolveOutcome { n_dofs: n, n_levels: solver.hierarchy.n_levels(), u, steps: out })
    }
}
