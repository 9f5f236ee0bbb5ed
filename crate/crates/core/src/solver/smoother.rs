use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm, LinearMap, SolverError};
use crate::scalar::Real;

/// Extreme eigenvalue estimates of `D⁻¹A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Lanczos steps actually taken.
    pub steps: usize,
}

/// Lanczos on `D^(-1/2) A D^(-1/2)` (similar to `D⁻¹A`) from a seeded random start.
pub fn estimate_eigenvalues<A: LinearMap + ?Sized>(
    a: &mut A,
    inv_diag: &[f64],
    steps: usize,
    seed: u64,
) -> Result<EigenEstimate, SolverError> {
    let n = inv_diag.len();
    if steps == 0 || n == 0 {
        return Err(SolverError::Config("eigenvalue estimate needs at least one step".into()));
    }
    let scale: Vec<f64> = inv_diag.iter().map(|d| d.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let qn = norm(&q);
    q.iter_mut().for_each(|v| *v /= qn);
    let mut q_prev = vec![0.0; n];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let (mut t, mut w) = (vec![0.0; n], vec![0.0; n]);
    let mut beta_prev = 0.0;
    for _ in 0..steps.min(n) {
        for i in 0..n {
            t[i] = scale[i] * q[i];
        }
        a.apply(&t, &mut w)?;
        for i in 0..n {
            w[i] = scale[i] * w[i] - beta_prev * q_prev[i];
        }
        let alpha = dot(&w, &q);
        for i in 0..n {
            w[i] -= alpha * q[i];
        }
        alphas.push(alpha);
        let beta = norm(&w);
        if beta <= 1e-12 * alpha.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..n {
            q[i] = w[i] / beta;
        }
        beta_prev = beta;
    }
    let m = alphas.len();
    let mut tri = DMatrix::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alphas[i];
        if i + 1 < m {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let ev = SymmetricEigen::new(tri).eigenvalues;
    Ok(EigenEstimate { lambda_min: ev.min(), lambda_max: ev.max(), steps: m })
}

/// Chebyshev acceleration of point Jacobi targeting the eigenvalues of `D⁻¹A`
/// in `[lambda_min, lambda_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSmoother<T> {
    pub degree: usize,
    pub inv_diag: Vec<T>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl<T: Real> ChebyshevSmoother<T> {
    /// Range `[safety λ_max / range, safety λ_max]`.
    pub fn new(inv_diag: &[f64], estimate: &EigenEstimate, degree: usize, range: f64, safety: f64) -> Result<Self, SolverError> {
        if degree == 0 || !(range > 1.0) || !(safety > 0.0) || !(estimate.lambda_max > 0.0) {
            return Err(SolverError::Config(format!(
                "invalid smoother: degree {degree}, range {range}, safety {safety}, λmax {}",
                estimate.lambda_max
            )));
        }
        let lambda_max = safety * estimate.lambda_max;
        Ok(ChebyshevSmoother {
            degree,
            inv_diag: inv_diag.iter().map(|&d| T::from_f64(d)).collect(),
            lambda_min: lambda_max / range,
            lambda_max,
        })
    }

    /// `degree` Chebyshev steps on `A x = b`. With `zero_guess` the input `x` is ignored.
    pub fn smooth<A: LinearMap<T> + ?Sized>(&self, a: &mut A, x: &mut [T], b: &[T], zero_guess: bool) -> Result<(), SolverError> {
        let n = b.len();
        let theta = 0.5 * (self.lambda_max + self.lambda_min);
        let delta = 0.5 * (self.lambda_max - self.lambda_min);
        let sigma = theta / delta;
        let mut rho = 1.0 / sigma;
        let mut r = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        if zero_guess {
            x.iter_mut().for_each(|v| *v = T::zero());
            r.copy_from_slice(b);
        } else {
            a.apply(x, &mut r)?;
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
        }
        let c = T::from_f64(1.0 / theta);
        for i in 0..n {
            d[i] = c * self.inv_diag[i] * r[i];
            x[i] += d[i];
        }
        for _ in 1..self.degree {
            let rho_new = 1.0 / (2.0 * sigma - rho);
            let (c1, c2) = (T::from_f64(rho_new * rho), T::from_f64(2.0 * rho_new / delta));
            a.apply(x, &mut r)?;
            for i in 0..n {
                d[i] = c1 * d[i] + c2 * self.inv_diag[i] * (b[i] - r[i]);
                x[i] += d[i];
            }
            rho = rho_new;
        }
        Ok(())
    }

    /// Largest `|p(λ)|` of the error polynomial over the target range.
    pub fn damping_bound(&self) -> f64 {
        let sigma = (self.lambda_max + self.lambda_min) / (self.lambda_max - self.lambda_min);
        1.0 / (self.degree as f64 * sigma.acosh()).cosh()
    }
}
