//! Linearizations: the directional derivative of `S` for integration over the
//! reference configuration and the contraction `Jc : (·)^S` for integration over
//! the current configuration. Fourth-order tensors are never formed.

use crate::fastscalar::KernelConfig;
use crate::scalar::Scalar;
use crate::tensor::{SymTensor2, Tensor2};

use super::cache::{CacheTensors, QpCache};
use super::model::{
    euler_strain, gather_scalars, inverses, kinematics, kirchhoff_from_parts, pushed_structure,
    strain, stress_from_parts, PointScalars,
};
use super::{ConstitutiveError, Domain, Material, ModelKind, Stability, Strategy};

/// Fiber contribution to the linearization of one family.
#[derive(Debug, Clone, Copy)]
pub struct FiberLin<S> {
    /// `c3 (2 k2 E_i² + 1)`.
    pub coef: S,
    /// `H_i` (reference) or `F H_i Fᵀ` (current configuration).
    pub h: SymTensor2<S>,
}

/// Everything needed to apply the linearized first Piola–Kirchhoff stress at a point.
#[derive(Debug, Clone, Copy)]
pub struct MaterialLin<S> {
    pub model: ModelKind,
    pub f: Tensor2<S>,
    pub f_inv: Tensor2<S>,
    pub s: SymTensor2<S>,
    pub c_inv: SymTensor2<S>,
    pub scalars: PointScalars<S>,
    mu: S,
    lambda: S,
    fibers: [FiberLin<S>; 2],
}

/// Everything needed to apply the linearized Kirchhoff stress at a point.
#[derive(Debug, Clone, Copy)]
pub struct SpatialLin<S> {
    pub model: ModelKind,
    pub tau: SymTensor2<S>,
    /// Green–Euler strain `b̃ = (b - I)/2`.
    pub b_tilde: SymTensor2<S>,
    pub scalars: PointScalars<S>,
    mu: S,
    lambda: S,
    fibers: [FiberLin<S>; 2],
}

fn fiber_lin<S: Scalar>(
    mat: &Material,
    sc: &PointScalars<S>,
    h: [SymTensor2<S>; 2],
) -> [FiberLin<S>; 2] {
    let k2x2 = S::lit(2.0 * mat.params.k2);
    std::array::from_fn(|k| {
        let fs = &sc.fibers[k];
        FiberLin { coef: fs.c3 * (k2x2 * fs.e_i * fs.e_i + S::one()), h: h[k] }
    })
}

fn reference_structure<S: Scalar>(mat: &Material) -> [SymTensor2<S>; 2] {
    match &mat.structure {
        Some(st) => st.h.map(|h| SymTensor2::from_f64(h.v)),
        None => [SymTensor2::zero(); 2],
    }
}

impl<S: Scalar> MaterialLin<S> {
    /// Linearization point rebuilt from `g` and given scalar coefficients.
    #[inline(always)]
    pub fn from_scalars(
        mat: &Material,
        g: &Tensor2<S>,
        scalars: PointScalars<S>,
        stability: Stability,
    ) -> Self {
        let f = g.plus_identity();
        let e = strain(g, &f, stability);
        let (f_inv, c_inv) = inverses(&f, scalars.j_minus_1, stability);
        let s = stress_from_parts(mat, &e, &c_inv, &scalars, stability);
        Self::assemble(mat, f, f_inv, s, c_inv, scalars)
    }

    #[inline(always)]
    fn assemble(
        mat: &Material,
        f: Tensor2<S>,
        f_inv: Tensor2<S>,
        s: SymTensor2<S>,
        c_inv: SymTensor2<S>,
        scalars: PointScalars<S>,
    ) -> Self {
        MaterialLin {
            model: mat.model,
            f,
            f_inv,
            s,
            c_inv,
            mu: S::lit(mat.params.mu),
            lambda: S::lit(mat.params.lambda),
            fibers: fiber_lin(mat, &scalars, reference_structure(mat)),
            scalars,
        }
    }

    /// Linearization point from a cache. `g` is only read when the cache holds no tensors.
    pub fn from_cache(
        mat: &Material,
        cache: &QpCache,
        g: &Tensor2<S>,
    ) -> Result<Self, ConstitutiveError> {
        cache.check(mat.model, Domain::Material)?;
        let scalars = PointScalars::splat_from(&cache.scalars);
        Ok(match &cache.tensors {
            Some(CacheTensors::Material { f, s, f_inv, c_inv }) => Self::assemble(
                mat,
                Tensor2::from_f64(f.m),
                Tensor2::from_f64(f_inv.m),
                SymTensor2::from_f64(s.v),
                SymTensor2::from_f64(c_inv.v),
                scalars,
            ),
            _ => Self::from_scalars(mat, g, scalars, cache.stability),
        })
    }

    /// Linearization with one lane per cache; all caches share strategy and stability.
    /// For [`Strategy::None`] everything is recomputed from `g`.
    #[inline(always)]
    pub fn from_cache_lanes(
        mat: &Material,
        caches: &[&QpCache],
        g: &Tensor2<S>,
        cfg: &KernelConfig,
    ) -> Result<Self, ConstitutiveError> {
        let first = caches[0];
        match first.strategy {
            Strategy::None => material_lin(mat, g, first.stability, cfg),
            Strategy::Scalar => {
                Ok(Self::from_scalars(mat, g, gather_scalars(caches), first.stability))
            }
            Strategy::Tensor => {
                let (mut f, mut f_inv) = (Tensor2::zero(), Tensor2::zero());
                let (mut s, mut c_inv) = (SymTensor2::zero(), SymTensor2::zero());
                for (l, c) in caches.iter().enumerate() {
                    match &c.tensors {
                        Some(CacheTensors::Material { f: cf, s: cs, f_inv: cfi, c_inv: cci }) => {
                            f.set_lane(l, &cf.to_precision());
                            f_inv.set_lane(l, &cfi.to_precision());
                            s.set_lane(l, &cs.to_precision());
                            c_inv.set_lane(l, &cci.to_precision());
                        }
                        _ => return Err(mismatch("material tensors", c)),
                    }
                }
                Ok(Self::assemble(mat, f, f_inv, s, c_inv, gather_scalars(caches)))
            }
        }
    }

    /// First Piola–Kirchhoff stress `F S`.
    #[inline(always)]
    pub fn first_pk(&self) -> Tensor2<S> {
        self.f.mul_sym(&self.s)
    }

    /// Directional derivative of `S` for `Grad Δu = d`.
    #[inline(always)]
    pub fn d_stress(&self, d: &Tensor2<S>) -> SymTensor2<S> {
        let sc = &self.scalars;
        let a = self.f_inv * *d;
        let tr_a = a.trace();
        let a_cinv = a.mul_sym(&self.c_inv).sym_part();
        let mut ds = match self.model {
            ModelKind::CompressibleNeoHooke => {
                let two_lam = self.lambda + self.lambda;
                let coef = self.mu - two_lam * sc.ln_j;
                a_cinv.scale(coef + coef) + self.c_inv.scale(two_lam * tr_a)
            }
            _ => {
                let m = S::lit(2.0 / 3.0) * self.mu * sc.jpow;
                let tr_ftd = self.f.tr_mul(d).trace();
                let mut out = a_cinv.scale(-(sc.c1 + sc.c1));
                out += self.c_inv.scale(sc.c2 * tr_a - m * tr_ftd);
                out.add_identity(-(m * tr_a))
            }
        };
        if self.model == ModelKind::Fiber {
            let ftd = self.f.tr_mul(d).sym_part();
            for fl in &self.fibers {
                let proj = fl.h.ddot(&ftd);
                ds += fl.h.scale(fl.coef * (proj + proj));
            }
        }
        ds
    }

    /// Linearized first Piola–Kirchhoff stress `d S + F D_u S`.
    #[inline(always)]
    pub fn apply(&self, d: &Tensor2<S>) -> Tensor2<S> {
        let ds = self.d_stress(d);
        d.mul_sym(&self.s) + self.f.mul_sym(&ds)
    }
}

impl<S: Scalar> SpatialLin<S> {
    #[inline(always)]
    pub fn from_scalars(
        mat: &Material,
        g: &Tensor2<S>,
        scalars: PointScalars<S>,
        stability: Stability,
    ) -> Self {
        let f = g.plus_identity();
        let b_tilde = euler_strain(g, &f, stability);
        let fhf = pushed_structure(mat, &f);
        let tau = kirchhoff_from_parts(mat, &f, &b_tilde, &fhf, &scalars, stability);
        Self::assemble(mat, tau, b_tilde, fhf, scalars)
    }

    #[inline(always)]
    fn assemble(
        mat: &Material,
        tau: SymTensor2<S>,
        b_tilde: SymTensor2<S>,
        fhf: [SymTensor2<S>; 2],
        scalars: PointScalars<S>,
    ) -> Self {
        let mut fibers = fiber_lin(mat, &scalars, fhf);
        for fl in fibers.iter_mut() {
            fl.coef = fl.coef + fl.coef;
        }
        SpatialLin {
            model: mat.model,
            tau,
            b_tilde,
            mu: S::lit(mat.params.mu),
            lambda: S::lit(mat.params.lambda),
            fibers,
            scalars,
        }
    }

    pub fn from_cache(
        mat: &Material,
        cache: &QpCache,
        g: &Tensor2<S>,
    ) -> Result<Self, ConstitutiveError> {
        cache.check(mat.model, Domain::Spatial)?;
        let scalars = PointScalars::splat_from(&cache.scalars);
        Ok(match &cache.tensors {
            Some(CacheTensors::Spatial { tau, b_tilde, fhf }) => Self::assemble(
                mat,
                SymTensor2::from_f64(tau.v),
                SymTensor2::from_f64(b_tilde.v),
                fhf.map(|t| SymTensor2::from_f64(t.v)),
                scalars,
            ),
            _ => Self::from_scalars(mat, g, scalars, cache.stability),
        })
    }

    /// Linearization with one lane per cache, see [`MaterialLin::from_cache_lanes`].
    #[inline(always)]
    pub fn from_cache_lanes(
        mat: &Material,
        caches: &[&QpCache],
        g: &Tensor2<S>,
        cfg: &KernelConfig,
    ) -> Result<Self, ConstitutiveError> {
        let first = caches[0];
        match first.strategy {
            Strategy::None => spatial_lin(mat, g, first.stability, cfg),
            Strategy::Scalar => {
                Ok(Self::from_scalars(mat, g, gather_scalars(caches), first.stability))
            }
            Strategy::Tensor => {
                let (mut tau, mut b_tilde) = (SymTensor2::zero(), SymTensor2::zero());
                let mut fhf = [SymTensor2::zero(); 2];
                for (l, c) in caches.iter().enumerate() {
                    match &c.tensors {
                        Some(CacheTensors::Spatial { tau: ct, b_tilde: cb, fhf: ch }) => {
                            tau.set_lane(l, &ct.to_precision());
                            b_tilde.set_lane(l, &cb.to_precision());
                            if mat.structure.is_some() {
                                for k in 0..2 {
                                    fhf[k].set_lane(l, &ch[k].to_precision());
                                }
                            }
                        }
                        _ => return Err(mismatch("spatial tensors", c)),
                    }
                }
                Ok(Self::assemble(mat, tau, b_tilde, fhf, gather_scalars(caches)))
            }
        }
    }

    /// `Jc : (x)^S` for a spatial velocity gradient `x`.
    #[inline(always)]
    pub fn material_part(&self, x: &Tensor2<S>) -> SymTensor2<S> {
        let sc = &self.scalars;
        let xs = x.sym_part();
        let tr = xs.trace();
        let mut out = match self.model {
            ModelKind::CompressibleNeoHooke => {
                let two_lam = self.lambda + self.lambda;
                let coef = self.mu - two_lam * sc.ln_j;
                xs.scale(coef + coef).add_identity(two_lam * tr)
            }
            _ => {
                let m = S::lit(2.0 / 3.0) * self.mu * sc.jpow;
                // b = I + 2 b̃, so b tr(x) + (b : x) I = 2 b̃ tr(x) + (2 b̃ : x + 2 tr x) I
                let bx = self.b_tilde.ddot(&xs);
                let mut out = self.b_tilde.scale(-(m * (tr + tr)));
                out += xs.scale(-(sc.c1 + sc.c1));
                out.add_identity(sc.c2 * tr - m * ((bx + bx) + (tr + tr)))
            }
        };
        if self.model == ModelKind::Fiber {
            for fl in &self.fibers {
                out += fl.h.scale(fl.coef * fl.h.ddot(&xs));
            }
        }
        out
    }

    /// Full integrand `Jc : (x)^S + x τ`.
    #[inline(always)]
    pub fn apply(&self, x: &Tensor2<S>) -> Tensor2<S> {
        self.material_part(x).to_tensor() + x.mul_sym(&self.tau)
    }
}

/// Linearization for integration over the reference configuration, all
/// quantities recomputed from `g`.
pub fn material_lin<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<MaterialLin<S>, ConstitutiveError> {
    let k = kinematics(mat, g, stability, cfg)?;
    Ok(MaterialLin::from_scalars(mat, g, k.scalars, stability))
}

/// Linearization for integration over the current configuration, all
/// quantities recomputed from `g`.
pub fn spatial_lin<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<SpatialLin<S>, ConstitutiveError> {
    let k = kinematics(mat, g, stability, cfg)?;
    Ok(SpatialLin::from_scalars(mat, g, k.scalars, stability))
}

fn mismatch(expected: &str, c: &QpCache) -> ConstitutiveError {
    ConstitutiveError::CacheMismatch {
        expected: expected.to_string(),
        found: format!("{}/{}/{}", c.model, c.domain, c.strategy),
    }
}

fn lin_source_check(cache: &QpCache, stability: Stability) -> Result<(), ConstitutiveError> {
    if cache.stability != stability {
        return Err(ConstitutiveError::CacheMismatch {
            expected: stability.to_string(),
            found: cache.stability.to_string(),
        });
    }
    Ok(())
}

/// `D_u S` in direction `d_grad = Grad Δu`, with linearization data from `cache`
/// (recomputed from `g` for [`Strategy::None`]).
pub fn tangent_material(
    mat: &Material,
    g: &Tensor2<f64>,
    d_grad: &Tensor2<f64>,
    cache: &QpCache,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<SymTensor2<f64>, ConstitutiveError> {
    lin_source_check(cache, stability)?;
    let lin = if cache.strategy == Strategy::None {
        cache.check(mat.model, Domain::Material)?;
        material_lin(mat, g, stability, cfg)?
    } else {
        MaterialLin::from_cache(mat, cache, g)?
    };
    Ok(lin.d_stress(d_grad))
}

/// `Jc : (x)^S + x τ` for `x = grad Δu`, with linearization data from `cache`.
pub fn tangent_spatial(
    mat: &Material,
    g: &Tensor2<f64>,
    d_grad_spatial: &Tensor2<f64>,
    cache: &QpCache,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<Tensor2<f64>, ConstitutiveError> {
    lin_source_check(cache, stability)?;
    let lin = if cache.strategy == Strategy::None {
        cache.check(mat.model, Domain::Spatial)?;
        spatial_lin(mat, g, stability, cfg)?
    } else {
        SpatialLin::from_cache(mat, cache, g)?
    };
    Ok(lin.apply(d_grad_spatial))
}
