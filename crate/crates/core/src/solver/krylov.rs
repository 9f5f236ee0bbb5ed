use super::{dot, norm, LinearMap, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgmresConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Krylov dimension before a restart.
    pub restart: usize,
    pub max_restarts: usize,
}

impl Default for FgmresConfig {
    fn default() -> Self {
        FgmresConfig { abs_tol: 1e-12, rel_tol: 1e-3, restart: 30, max_restarts: 20 }
    }
}

impl FgmresConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.restart == 0 || !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) {
            return Err(SolverError::Config(format!("invalid FGMRES settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgmresReport {
    pub iterations: usize,
    pub residual: f64,
    pub initial_residual: f64,
}

/// Right-preconditioned flexible GMRES with restarts. `x` holds the initial
/// guess on entry and the solution on exit. Stops once
/// `‖b − A x‖ ≤ max(abs_tol, rel_tol ‖b‖)`.
pub fn fgmres<A, M>(a: &mut A, m: &mut M, b: &[f64], x: &mut [f64], cfg: &FgmresConfig) -> Result<FgmresReport, SolverError>
where
    A: LinearMap + ?Sized,
    M: LinearMap + ?Sized,
{
    cfg.validate()?;
    let n = b.len();
    if x.len() != n {
        return Err(SolverError::SizeMismatch { expected: n, found: x.len() });
    }
    let target = cfg.abs_tol.max(cfg.rel_tol * norm(b));
    let k = cfg.restart;
    let mut v: Vec<Vec<f64>> = (0..=k).map(|_| vec![0.0; n]).collect();
    let mut z: Vec<Vec<f64>> = (0..k).map(|_| vec![0.0; n]).collect();
    let mut h = vec![vec![0.0; k]; k + 1];
    let (mut cs, mut sn, mut g) = (vec![0.0; k], vec![0.0; k], vec![0.0; k + 1]);
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let mut initial = None;

    for restart in 0..=cfg.max_restarts {
        a.apply(x, &mut w)?;
        for i in 0..n {
            v[0][i] = b[i] - w[i];
        }
        let beta = norm(&v[0]);
        let initial_residual = *initial.get_or_insert(beta);
        if beta <= target {
            return Ok(FgmresReport { iterations, residual: beta, initial_residual });
        }
        if restart == cfg.max_restarts {
            return Err(SolverError::MaxRestarts { restarts: restart, residual: beta });
        }
        v[0].iter_mut().for_each(|e| *e /= beta);
        g.iter_mut().for_each(|e| *e = 0.0);
        g[0] = beta;
        let mut used = 0;
        let mut breakdown = false;
        for j in 0..k {
            m.apply(&v[j], &mut z[j])?;
            a.apply(&z[j], &mut w)?;
            iterations += 1;
            for i in 0..=j {
                let hij = dot(&w, &v[i]);
                h[i][j] = hij;
                for (wl, vl) in w.iter_mut().zip(&v[i]) {
                    *wl -= hij * vl;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let r = h[j][j].hypot(h[j + 1][j]);
            if r == 0.0 {
                return Err(SolverError::Breakdown { iterations, residual: g[j].abs() });
            }
            cs[j] = h[j][j] / r;
            sn[j] = h[j + 1][j] / r;
            h[j][j] = r;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() <= target {
                break;
            }
            if hn <= 1e-14 * beta {
                breakdown = true;
                break;
            }
            for (vl, wl) in v[j + 1].iter_mut().zip(&w) {
                *vl = wl / hn;
            }
        }
        // back substitution
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (l, yl) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[l]) {
                *xi += yl * zi;
            }
        }
        if breakdown {
            a.apply(x, &mut w)?;
            let res = b.iter().zip(&w).map(|(bi, wi)| (bi - wi).powi(2)).sum::<f64>().sqrt();
            if res <= target {
                return Ok(FgmresReport { iterations, residual: res, initial_residual });
            }
            return Err(SolverError::Breakdown { iterations, residual: res });
        }
    }
    unreachable!("the restart loop returns")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final residual norm relative to the initial one.
    pub relative: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn conjugate_gradient<A: LinearMap + ?Sized>(
    a: &mut A,
    inv_diag: &[f64],
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgReport), SolverError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = norm(&r);
    if r0 == 0.0 {
        return Ok((x, CgReport { iterations: 0, relative: 0.0 }));
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 1..=max_iter {
        a.apply(&p, &mut q)?;
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm(&r) / r0;
        if rel <= rel_tol {
            return Ok((x, CgReport { iterations: it, relative: rel }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::CgNoConvergence { iterations: max_iter, relative: norm(&r) / r0 })
}
