use std::time::Instant;

use super::{norm, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { eps_abs: 1e-8, eps_rel: 1e-3, max_iter: 25 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.eps_abs > 0.0) || !(self.eps_rel > 0.0) {
            return Err(SolverError::Config(format!("Newton tolerances must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Nonlinear system `r(u) = 0` with a linear solver for its Jacobian.
pub trait NewtonSystem {
    fn residual(&mut self, u: &[f64]) -> Result<Vec<f64>, SolverError>;
    /// Rebuilds the Jacobian at `u`.
    fn linearize(&mut self, u: &[f64]) -> Result<(), SolverError>;
    /// Solves `J x = rhs`; returns `x` and the iteration count.
    fn solve_linear(&mut self, rhs: &[f64]) -> Result<(Vec<f64>, usize), SolverError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// `‖r(u_k)‖` for `k = 0..=iterations`.
    pub residuals: Vec<f64>,
    /// Linear iterations per Newton step.
    pub linear_iterations: Vec<usize>,
    /// Wall time per Newton step.
    pub step_seconds: Vec<f64>,
}

/// Plain Newton iteration without line search.
pub fn newton_solve<P: NewtonSystem + ?Sized>(
    system: &mut P,
    u0: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonReport, SolverError> {
    cfg.validate()?;
    let mut u = u0;
    let mut r = system.residual(&u)?;
    let r0 = norm(&r);
    let mut report = NewtonReport {
        u: Vec::new(),
        iterations: 0,
        residuals: vec![r0],
        linear_iterations: Vec::new(),
        step_seconds: Vec::new(),
    };
    let mut rn = r0;
    while rn > cfg.eps_abs && rn > cfg.eps_rel * r0 {
        let k = report.iterations;
        if k >= cfg.max_iter {
            return Err(SolverError::MaxIterationsExceeded { iterations: k, residual: rn });
        }
        let start = Instant::now();
        system.linearize(&u)?;
        r.iter_mut().for_each(|v| *v = -*v);
        let (du, its) = system
            .solve_linear(&r)
            .map_err(|e| SolverError::LinearSolveFailure { step: k + 1, source: Box::new(e) })?;
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
        r = system.residual(&u)?;
        rn = norm(&r);
        report.iterations += 1;
        report.residuals.push(rn);
        report.linear_iterations.push(its);
        report.step_seconds.push(start.elapsed().as_secs_f64());
    }
    report.u = u;
    Ok(report)
}
