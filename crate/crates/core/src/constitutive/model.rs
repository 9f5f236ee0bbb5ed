use num_traits::Zero;

use crate::fastscalar::{self, KernelConfig};
use crate::scalar::{Real, Scalar};
use crate::tensor::{
    green_euler_stable, green_lagrange_stable, inverse_c_stable, SymTensor2, Tensor2,
};

use super::cache::QpCache;
use super::{ConstitutiveError, Material, ModelKind, Stability};

/// Scalar fiber quantities of one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberScalars<S> {
    /// `2 k1 exp(k2 E_i²)` when the family is in tension, else zero.
    pub c3: S,
    /// `I_i* - 1`, the squared mean-fiber stretch minus one.
    pub i_star_m1: S,
    /// `E_i = H_i : (C - I)`.
    pub e_i: S,
}

/// Scalar coefficients at one quadrature point.
///
/// `ln_j` is only evaluated for the compressible model and `c1`, `c2` only for
/// the incompressible ones; unused entries are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScalars<S> {
    pub j_minus_1: S,
    pub jpow: S,
    pub ln_j: S,
    pub inv_j: S,
    pub c1: S,
    pub c2: S,
    pub fibers: [FiberScalars<S>; 2],
}

impl<S: Scalar> PointScalars<S> {
    pub fn zero() -> Self {
        let z = S::zero();
        let fz = FiberScalars { c3: z, i_star_m1: z, e_i: z };
        PointScalars { j_minus_1: z, jpow: z, ln_j: z, inv_j: z, c1: z, c2: z, fibers: [fz; 2] }
    }

    /// Copy of a double-precision record in the scalar type `S`.
    pub fn splat_from(src: &PointScalars<f64>) -> Self {
        let c = |v: f64| S::lit(v);
        PointScalars {
            j_minus_1: c(src.j_minus_1),
            jpow: c(src.jpow),
            ln_j: c(src.ln_j),
            inv_j: c(src.inv_j),
            c1: c(src.c1),
            c2: c(src.c2),
            fibers: src.fibers.map(|f| FiberScalars {
                c3: c(f.c3),
                i_star_m1: c(f.i_star_m1),
                e_i: c(f.e_i),
            }),
        }
    }

    pub fn lane(&self, l: usize) -> PointScalars<S::Elem> {
        PointScalars {
            j_minus_1: self.j_minus_1.lane(l),
            jpow: self.jpow.lane(l),
            ln_j: self.ln_j.lane(l),
            inv_j: self.inv_j.lane(l),
            c1: self.c1.lane(l),
            c2: self.c2.lane(l),
            fibers: self.fibers.map(|f| FiberScalars {
                c3: f.c3.lane(l),
                i_star_m1: f.i_star_m1.lane(l),
                e_i: f.e_i.lane(l),
            }),
        }
    }

    pub fn set_lane(&mut self, l: usize, v: &PointScalars<S::Elem>) {
        self.j_minus_1.set_lane(l, v.j_minus_1);
        self.jpow.set_lane(l, v.jpow);
        self.ln_j.set_lane(l, v.ln_j);
        self.inv_j.set_lane(l, v.inv_j);
        self.c1.set_lane(l, v.c1);
        self.c2.set_lane(l, v.c2);
        for k in 0..2 {
            self.fibers[k].c3.set_lane(l, v.fibers[k].c3);
            self.fibers[k].i_star_m1.set_lane(l, v.fibers[k].i_star_m1);
            self.fibers[k].e_i.set_lane(l, v.fibers[k].e_i);
        }
    }
}

impl PointScalars<f64> {
    pub fn cast<T: Real>(&self) -> PointScalars<T> {
        let c = T::from_f64;
        PointScalars {
            j_minus_1: c(self.j_minus_1),
            jpow: c(self.jpow),
            ln_j: c(self.ln_j),
            inv_j: c(self.inv_j),
            c1: c(self.c1),
            c2: c(self.c2),
            fibers: self.fibers.map(|f| FiberScalars {
                c3: c(f.c3),
                i_star_m1: c(f.i_star_m1),
                e_i: c(f.e_i),
            }),
        }
    }
}

/// One lane per cache.
pub(crate) fn gather_scalars<S: Scalar>(caches: &[&QpCache]) -> PointScalars<S> {
    let mut out = PointScalars::zero();
    for (l, c) in caches.iter().enumerate() {
        out.set_lane(l, &c.scalars.cast());
    }
    out
}

/// Kinematic quantities shared by all evaluations at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kinematics<S> {
    pub f: Tensor2<S>,
    /// Green–Lagrange strain.
    pub e: SymTensor2<S>,
    pub scalars: PointScalars<S>,
}

pub(crate) fn check_jacobian<S: Scalar>(j_minus_1: S) -> Result<(), ConstitutiveError> {
    let neg_one = S::Elem::from_f64(-1.0);
    for l in 0..S::LANES {
        let v = j_minus_1.lane(l);
        if !(v > neg_one) {
            return Err(ConstitutiveError::NonPositiveJacobian { j_minus_1: v.to_f64() });
        }
    }
    Ok(())
}

/// Green–Lagrange strain in the requested form.
#[inline(always)]
pub(crate) fn strain<S: Scalar>(g: &Tensor2<S>, f: &Tensor2<S>, stability: Stability) -> SymTensor2<S> {
    match stability {
        Stability::Stable => green_lagrange_stable(g),
        Stability::Standard => {
            (f.tr_mul(f) - Tensor2::identity()).sym_part().scale(S::lit(0.5))
        }
    }
}

/// Per-lane `if cond > 0 { a } else { b }`.
#[inline(always)]
pub(crate) fn select_positive<S: Scalar>(cond: S, a: S, b: S) -> S {
    cond.zip3_map(a, b, |c, a, b| if c > S::Elem::zero() { a } else { b })
}

#[inline(always)]
pub(crate) fn kinematics<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<Kinematics<S>, ConstitutiveError> {
    let f = g.plus_identity();
    let e = strain(g, &f, stability);
    let scalars = scalars_from_strain(mat, g, &f, &e, stability, cfg)?;
    Ok(Kinematics { f, e, scalars })
}

/// Scalar coefficients at a point with displacement gradient `g`.
pub fn point_scalars<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<PointScalars<S>, ConstitutiveError> {
    Ok(kinematics(mat, g, stability, cfg)?.scalars)
}

#[inline(always)]
fn scalars_from_strain<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    f: &Tensor2<S>,
    e: &SymTensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<PointScalars<S>, ConstitutiveError> {
    let p = &mat.params;
    let mut out = PointScalars::zero();
    let j_minus_1 = match stability {
        Stability::Stable => g.det_minus_one(),
        Stability::Standard => f.determinant() - S::one(),
    };
    check_jacobian(j_minus_1)?;
    let j = j_minus_1 + S::one();
    out.j_minus_1 = j_minus_1;
    out.inv_j = j.recip();
    let tr_e = e.trace();
    let i1 = S::lit(3.0) + (tr_e + tr_e);

    match mat.model {
        ModelKind::CompressibleNeoHooke => {
            out.ln_j = match stability {
                Stability::Stable => fastscalar::ln_plus_one_unchecked(j_minus_1, cfg.ln_series_terms),
                Stability::Standard => j.ln(),
            };
        }
        ModelKind::IncompressibleNeoHooke | ModelKind::Fiber => {
            let (mu, kappa) = (S::lit(p.mu), S::lit(p.kappa));
            let (jpow, vol) = match stability {
                Stability::Stable => {
                    (fastscalar::jpow(j_minus_1, cfg), j_minus_1 * (j_minus_1 + S::lit(2.0)))
                }
                Stability::Standard => (j.powf(-2.0 / 3.0), j * j - S::one()),
            };
            out.jpow = jpow;
            out.c1 = S::lit(0.5) * kappa * vol - mu * S::lit(1.0 / 3.0) * jpow * i1;
            out.c2 = S::lit(2.0 / 9.0) * mu * jpow * i1 + kappa * (j * j);
        }
    }

    if let Some(st) = &mat.structure {
        let (k1, k2) = (S::lit(2.0 * p.k1), S::lit(p.k2));
        for fam in 0..2 {
            let h = SymTensor2::<S>::from_f64(st.h[fam].v);
            let m = SymTensor2::<S>::from_f64(st.m1m1[fam].v);
            let (e_i, i_star_m1) = match stability {
                Stability::Stable => {
                    let he = h.ddot(e);
                    let me = m.ddot(e);
                    (he + he, me + me)
                }
                Stability::Standard => {
                    let c = f.tr_mul(f).sym_part();
                    (h.ddot(&c) - S::one(), m.ddot(&c) - S::one())
                }
            };
            let active = k1 * fastscalar::exp(k2 * e_i * e_i, cfg);
            out.fibers[fam] = FiberScalars { c3: select_positive(i_star_m1, active, S::zero()), i_star_m1, e_i };
        }
    }
    Ok(out)
}

/// `F⁻¹` and `C⁻¹` in the requested form.
#[inline(always)]
pub(crate) fn inverses<S: Scalar>(
    f: &Tensor2<S>,
    j_minus_1: S,
    stability: Stability,
) -> (Tensor2<S>, SymTensor2<S>) {
    match stability {
        Stability::Stable => {
            let f_inv = f.inverse_unchecked_with_det(j_minus_1 + S::one());
            (f_inv, inverse_c_stable(&f_inv))
        }
        Stability::Standard => {
            let f_inv = f.inverse_unchecked_with_det(f.determinant());
            let c = f.tr_mul(f);
            (f_inv, c.inverse_unchecked_with_det(c.determinant()).sym_part())
        }
    }
}

/// Second Piola–Kirchhoff stress from precomputed pieces.
#[inline(always)]
pub(crate) fn stress_from_parts<S: Scalar>(
    mat: &Material,
    e: &SymTensor2<S>,
    c_inv: &SymTensor2<S>,
    sc: &PointScalars<S>,
    stability: Stability,
) -> SymTensor2<S> {
    let p = &mat.params;
    let mu = S::lit(p.mu);
    let mut s = match (mat.model, stability) {
        (ModelKind::CompressibleNeoHooke, Stability::Stable) => {
            let lam2 = S::lit(2.0 * p.lambda);
            c_inv.sym_mul(&e.scale(mu + mu).add_identity(lam2 * sc.ln_j))
        }
        (ModelKind::CompressibleNeoHooke, Stability::Standard) => {
            let coef = mu - S::lit(2.0 * p.lambda) * sc.ln_j;
            (-c_inv.scale(coef)).add_identity(mu)
        }
        (_, Stability::Stable) => {
            let jm1 = sc.j_minus_1;
            let vol = S::lit(0.5 * p.kappa) * jm1 * (jm1 + S::lit(2.0));
            let dev = e.add_identity(-(e.trace() * S::lit(1.0 / 3.0)));
            c_inv.sym_mul(&dev.scale((mu + mu) * sc.jpow).add_identity(vol))
        }
        (_, Stability::Standard) => c_inv.scale(sc.c1).add_identity(mu * sc.jpow),
    };
    if let Some(st) = &mat.structure {
        for fam in 0..2 {
            let fs = &sc.fibers[fam];
            s += SymTensor2::<S>::from_f64(st.h[fam].v).scale(fs.c3 * fs.e_i);
        }
    }
    s
}

/// Kirchhoff stress from precomputed pieces; `b_tilde` is the Green–Euler strain.
#[inline(always)]
pub(crate) fn kirchhoff_from_parts<S: Scalar>(
    mat: &Material,
    f: &Tensor2<S>,
    b_tilde: &SymTensor2<S>,
    fhf: &[SymTensor2<S>; 2],
    sc: &PointScalars<S>,
    stability: Stability,
) -> SymTensor2<S> {
    let p = &mat.params;
    let mu = S::lit(p.mu);
    let mut tau = match (mat.model, stability) {
        (ModelKind::CompressibleNeoHooke, Stability::Stable) => {
            b_tilde.scale(mu + mu).add_identity(S::lit(2.0 * p.lambda) * sc.ln_j)
        }
        (ModelKind::CompressibleNeoHooke, Stability::Standard) => {
            let b = f.mul_tr(f).sym_part();
            b.scale(mu).add_identity(-(mu - S::lit(2.0 * p.lambda) * sc.ln_j))
        }
        (_, Stability::Stable) => {
            let jm1 = sc.j_minus_1;
            let vol = S::lit(0.5 * p.kappa) * jm1 * (jm1 + S::lit(2.0));
            let dev = b_tilde.add_identity(-(b_tilde.trace() * S::lit(1.0 / 3.0)));
            dev.scale((mu + mu) * sc.jpow).add_identity(vol)
        }
        (_, Stability::Standard) => {
            let b = f.mul_tr(f).sym_part();
            b.scale(mu * sc.jpow).add_identity(sc.c1)
        }
    };
    if mat.structure.is_some() {
        for fam in 0..2 {
            let fs = &sc.fibers[fam];
            tau += fhf[fam].scale(fs.c3 * fs.e_i);
        }
    }
    tau
}

/// Green–Euler strain in the requested form.
#[inline(always)]
pub(crate) fn euler_strain<S: Scalar>(
    g: &Tensor2<S>,
    f: &Tensor2<S>,
    stability: Stability,
) -> SymTensor2<S> {
    match stability {
        Stability::Stable => green_euler_stable(g),
        Stability::Standard => (f.mul_tr(f) - Tensor2::identity()).sym_part().scale(S::lit(0.5)),
    }
}

/// `F H_i Fᵀ` of both families (zero without fibers).
#[inline(always)]
pub(crate) fn pushed_structure<S: Scalar>(mat: &Material, f: &Tensor2<S>) -> [SymTensor2<S>; 2] {
    match &mat.structure {
        Some(st) => std::array::from_fn(|k| SymTensor2::from_f64(st.h[k].v).push_forward(f)),
        None => [SymTensor2::zero(); 2],
    }
}

/// Second Piola–Kirchhoff stress `S` at displacement gradient `g`.
pub fn second_pk<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<SymTensor2<S>, ConstitutiveError> {
    let k = kinematics(mat, g, stability, cfg)?;
    let (_, c_inv) = inverses(&k.f, k.scalars.j_minus_1, stability);
    Ok(stress_from_parts(mat, &k.e, &c_inv, &k.scalars, stability))
}

/// Kirchhoff stress `τ = F S Fᵀ` at displacement gradient `g`.
pub fn kirchhoff<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<SymTensor2<S>, ConstitutiveError> {
    let k = kinematics(mat, g, stability, cfg)?;
    let b_tilde = euler_strain(g, &k.f, stability);
    let fhf = pushed_structure(mat, &k.f);
    Ok(kirchhoff_from_parts(mat, &k.f, &b_tilde, &fhf, &k.scalars, stability))
}

/// Strain-energy density per unit reference volume.
pub fn energy<S: Scalar>(
    mat: &Material,
    g: &Tensor2<S>,
    stability: Stability,
    cfg: &KernelConfig,
) -> Result<S, ConstitutiveError> {
    let k = kinematics(mat, g, stability, cfg)?;
    let p = &mat.params;
    let sc = &k.scalars;
    let mu = S::lit(p.mu);
    let tr_e = k.e.trace();
    let jm1 = sc.j_minus_1;
    let ln_j = match stability {
        Stability::Stable => fastscalar::ln_plus_one_unchecked(jm1, cfg.ln_series_terms),
        Stability::Standard => (jm1 + S::one()).ln(),
    };
    let mut psi = match mat.model {
        ModelKind::CompressibleNeoHooke => {
            mu * (tr_e - ln_j) + S::lit(p.lambda) * ln_j * ln_j
        }
        _ => {
            let i1 = S::lit(3.0) + (tr_e + tr_e);
            let vol = match stability {
                Stability::Stable => jm1 * (jm1 + S::lit(2.0)),
                Stability::Standard => {
                    let j = jm1 + S::one();
                    j * j - S::one()
                }
            };
            S::lit(0.5) * mu * (sc.jpow * i1 - S::lit(3.0))
                + S::lit(0.25 * p.kappa) * (vol - (ln_j + ln_j))
        }
    };
    if mat.structure.is_some() {
        let (k1, k2) = (p.k1, p.k2);
        for fs in &sc.fibers {
            let e2 = fs.e_i * fs.e_i;
            let term = S::lit(k1 / (2.0 * k2)) * (fastscalar::exp(S::lit(k2) * e2, cfg) - S::one());
            psi += select_positive(fs.i_star_m1, term, S::zero());
        }
    }
    Ok(psi)
}

/// St. Venant–Kirchhoff stress `λ tr(E) I + 2μ E` with the stable strain.
pub fn st_venant_kirchhoff<S: Scalar>(mu: f64, lambda: f64, g: &Tensor2<S>) -> SymTensor2<S> {
    let e = green_lagrange_stable(g);
    let mu = S::lit(mu);
    e.scale(mu + mu).add_identity(S::lit(lambda) * e.trace())
}
