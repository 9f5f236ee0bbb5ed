//! Matrix-free nonlinear residual and linearized operator of finite-strain
//! elasticity, integrated over the reference or the current configuration.
//!
//! Element work is done by sum factorization on batches of elements, one
//! element per lane. Elements are colored by the parity of their lattice
//! position so that no two batches of one color touch the same node.

mod kernel;
mod loads;

pub use loads::{assemble_body_force, assemble_traction};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::constitutive::{
    byte_ledger, compute_cache, kirchhoff, second_pk, ByteLedger, ConstitutiveError, Domain,
    Formulation, Material, MaterialLin, QpCache, SpatialLin, Stability, Strategy,
};
use crate::fastscalar::KernelConfig;
use crate::mesh::FeLevel;
use crate::scalar::{Batch, Real, Scalar};
use crate::tensor::Tensor2;

use kernel::{Tables, Work};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("non-positive Jacobian in element {element} at quadrature point {qp}")]
    NonPositiveJacobian { element: usize, qp: usize },
    #[error("linearization data does not match the current iterate")]
    StaleCache,
    #[error("{n} unknowns exceed the assembly cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("vector has length {found}, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid operator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
}

/// Floating-point type together with the batch used for its element loops.
pub trait LaneReal: Real {
    type Lanes: Scalar<Elem = Self>;
}

impl LaneReal for f64 {
    type Lanes = Batch<f64, { <f64 as Real>::NATURAL_LANES }>;
}

impl LaneReal for f32 {
    type Lanes = Batch<f32, { <f32 as Real>::NATURAL_LANES }>;
}

const MAX_LANES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub formulation: Formulation,
    pub strategy: Strategy,
    pub kernel: KernelConfig,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            formulation: Formulation::stable(Domain::Material),
            strategy: Strategy::Tensor,
            kernel: KernelConfig::default(),
        }
    }
}

/// Current-configuration geometry of one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPoint {
    pub jt_inv: Tensor2<f64>,
    /// `det J_t` times the quadrature weight.
    pub jxw: f64,
}

/// Diagonal of the linearized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalReport {
    pub diagonal: Vec<f64>,
    /// Unconstrained unknowns whose diagonal entry is not positive.
    pub nonpositive: Vec<usize>,
}

pub const DEFAULT_ORACLE_CAP: usize = 5000;

/// 64-bit FNV-1a over the bit patterns of a vector.
pub fn checksum(v: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in v {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Shared output vector of a colored element loop.
struct Scatter<T>(*mut T, usize);
unsafe impl<T: Send> Sync for Scatter<T> {}
unsafe impl<T: Send> Send for Scatter<T> {}

impl<T: Real> Scatter<T> {
    /// # Safety
    /// No other thread may write `i` concurrently; guaranteed by the coloring.
    #[inline(always)]
    unsafe fn add(&self, i: usize, v: T) {
        debug_assert!(i < self.1);
        *self.0.add(i) += v;
    }
}

#[derive(Debug, Clone)]
pub struct ElasticOperator {
    level: FeLevel,
    material: Material,
    config: OperatorConfig,
    caches: Vec<QpCache>,
    spatial: Vec<SpatialPoint>,
    u_k: Vec<f64>,
    checksum: Option<u64>,
    load: Vec<f64>,
    colors: Vec<Vec<usize>>,
    qweights: Vec<f64>,
}

impl ElasticOperator {
    pub fn new(level: FeLevel, material: Material, config: OperatorConfig) -> Result<Self, OperatorError> {
        config.kernel.validate().map_err(ConstitutiveError::from)?;
        let mut colors = vec![Vec::new(); 8];
        for e in 0..level.n_elements() {
            let [i, j, k] = level.mesh.element_ijk(e);
            colors[(i % 2) + 2 * (j % 2) + 4 * (k % 2)].push(e);
        }
        colors.retain(|c| !c.is_empty());
        let w = &level.basis.qweights;
        let nq = w.len();
        let mut qweights = Vec::with_capacity(nq.pow(3));
        for z in 0..nq {
            for y in 0..nq {
                for x in 0..nq {
                    qweights.push(w[x] * w[y] * w[z]);
                }
            }
        }
        let n = level.n_dofs();
        Ok(ElasticOperator {
            level,
            material,
            config,
            caches: Vec::new(),
            spatial: Vec::new(),
            u_k: vec![0.0; n],
            checksum: None,
            load: vec![0.0; n],
            colors,
            qweights,
        })
    }

    pub fn level(&self) -> &FeLevel {
        &self.level
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.config
    }

    pub fn n_dofs(&self) -> usize {
        self.level.n_dofs()
    }

    /// Element partition used by the parallel loops.
    pub fn colors(&self) -> &[Vec<usize>] {
        &self.colors
    }

    pub fn linearization_point(&self) -> &[f64] {
        &self.u_k
    }

    pub fn caches(&self) -> &[QpCache] {
        &self.caches
    }

    /// Current-configuration geometry, spatial domain only.
    pub fn spatial_points(&self) -> &[SpatialPoint] {
        &self.spatial
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// External load vector (body force and traction), subtracted in the residual.
    pub fn set_load(&mut self, load: Vec<f64>) -> Result<(), OperatorError> {
        self.check_len(load.len())?;
        self.load = load;
        Ok(())
    }

    pub fn byte_ledger(&self) -> ByteLedger {
        byte_ledger(self.material.model, self.config.formulation.domain, self.config.strategy)
    }

    fn check_len(&self, n: usize) -> Result<(), OperatorError> {
        if n != self.n_dofs() {
            return Err(OperatorError::SizeMismatch { expected: self.n_dofs(), found: n });
        }
        Ok(())
    }

    fn needs_u_k(&self) -> bool {
        self.config.strategy != Strategy::Tensor
    }

    /// Fails with [`OperatorError::StaleCache`] unless the caches were built from `u`.
    pub fn check_current(&self, u: &[f64]) -> Result<(), OperatorError> {
        match self.checksum {
            Some(c) if c == checksum(u) => Ok(()),
            _ => Err(OperatorError::StaleCache),
        }
    }

    fn check_linearized(&self) -> Result<(), OperatorError> {
        match self.checksum {
            Some(c) if c == checksum(&self.u_k) => Ok(()),
            _ => Err(OperatorError::StaleCache),
        }
    }

    /// Recomputes the quadrature-point data at `u_k`.
    pub fn update_linearization(&mut self, u_k: &[f64]) -> Result<(), OperatorError> {
        self.check_len(u_k.len())?;
        let nq3 = self.level.qp_per_element();
        let tables = Tables::<f64>::new(&self.level.basis);
        let form = self.config.formulation;
        let spatial = form.domain == Domain::Spatial;
        let per_element: Vec<Result<(Vec<QpCache>, Vec<SpatialPoint>), OperatorError>> = (0
            ..self.level.n_elements())
            .into_par_iter()
            .map_init(
                || Work::<f64>::new(&tables),
                |w, e| {
                    self.gather(u_k, &[e], &mut w.xe, |v| v);
                    w.gradients_of_xe(&tables);
                    let mut caches = Vec::with_capacity(nq3);
                    let mut points = Vec::with_capacity(if spatial { nq3 } else { 0 });
                    for q in 0..nq3 {
                        let idx = e * nq3 + q;
                        let gxi = read_tensor(&w.grad, q, nq3);
                        let g = gxi * self.level.geometry.j0_inv[idx];
                        let cache =
                            compute_cache(&self.material, &g, self.config.strategy, form, &self.config.kernel)
                                .map_err(|err| match err {
                                    ConstitutiveError::NonPositiveJacobian { .. } => {
                                        OperatorError::NonPositiveJacobian { element: e, qp: q }
                                    }
                                    other => other.into(),
                                })?;
                        caches.push(cache);
                        if spatial {
                            let jt = self.level.geometry.j0[idx] + gxi;
                            let det = jt.determinant();
                            if !(det > 0.0) {
                                return Err(OperatorError::NonPositiveJacobian { element: e, qp: q });
                            }
                            points.push(SpatialPoint {
                                jt_inv: jt.inverse_unchecked_with_det(det),
                                jxw: det * self.qweights[q],
                            });
                        }
                    }
                    Ok((caches, points))
                },
            )
            .collect();
        let mut caches = Vec::with_capacity(self.level.n_elements() * nq3);
        let mut points = Vec::new();
        for r in per_element {
            let (c, p) = r?;
            caches.extend(c);
            points.extend(p);
        }
        self.caches = caches;
        self.spatial = points;
        self.u_k.clear();
        self.u_k.extend_from_slice(u_k);
        self.checksum = Some(checksum(u_k));
        Ok(())
    }

    /// Copies element values of `x` into lanes; `elems` has one entry per lane.
    #[inline(always)]
    fn gather<S: Scalar, V: Copy>(&self, x: &[V], elems: &[usize], xe: &mut [S], conv: impl Fn(V) -> S::Elem) {
        let nd3 = self.level.nodes_per_element();
        let offsets = self.level.offsets();
        for (l, &e) in elems.iter().enumerate() {
            let base = self.level.element_base(e);
            for (n, &off) in offsets.iter().enumerate() {
                let d = 3 * (base + off);
                for c in 0..3 {
                    xe[c * nd3 + n].set_lane(l, conv(x[d + c]));
                }
            }
        }
    }

    /// Runs `kernel` on every batch of elements and scatter-adds `Work::ye` into `y`.
    fn element_loop<S, K>(&self, tables: &Tables<S>, y: &mut [S::Elem], kernel: K) -> Result<(), OperatorError>
    where
        S: Scalar,
        K: Fn(&[usize], &mut Work<S>) -> Result<(), OperatorError> + Sync,
    {
        assert!(S::LANES <= MAX_LANES);
        let out = Scatter(y.as_mut_ptr(), y.len());
        let nd3 = self.level.nodes_per_element();
        let offsets = self.level.offsets();
        for color in &self.colors {
            color.par_chunks(S::LANES).try_for_each_init(
                || (Work::new(tables), vec![0usize; S::LANES]),
                |(w, elems), chunk| {
                    // pad the remainder batch with copies of its last element
                    for l in 0..S::LANES {
                        elems[l] = chunk[l.min(chunk.len() - 1)];
                    }
                    kernel(elems, w)?;
                    for (l, &e) in elems.iter().take(chunk.len()).enumerate() {
                        let base = self.level.element_base(e);
                        for (n, &off) in offsets.iter().enumerate() {
                            let d = 3 * (base + off);
                            for c in 0..3 {
                                // SAFETY: elements of one color share no nodes.
                                unsafe { out.add(d + c, w.ye[c * nd3 + n].lane(l)) };
                            }
                        }
                    }
                    Ok::<(), OperatorError>(())
                },
            )?;
        }
        Ok(())
    }

    /// Nonlinear residual `r(u)`: internal forces minus the load vector, zero on
    /// constrained unknowns.
    pub fn evaluate_residual(&self, u: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(u.len())?;
        type S = <f64 as LaneReal>::Lanes;
        let tables = Tables::<S>::new(&self.level.basis);
        let nq3 = self.level.qp_per_element();
        let geo = &self.level.geometry;
        let (mat, form, kcfg) = (&self.material, self.config.formulation, &self.config.kernel);
        let mut r = vec![0.0; u.len()];
        self.element_loop(&tables, &mut r, |elems, w: &mut Work<S>| {
            self.gather(u, elems, &mut w.xe, |v| v);
            w.gradients_of_xe(&tables);
            for q in 0..nq3 {
                let gxi = read_tensor(&w.grad, q, nq3);
                let j0_inv: Tensor2<S> = lanes_tensor(&geo.j0_inv, elems, q, nq3);
                let g = gxi * j0_inv;
                let jm1 = match form.stability {
                    Stability::Stable => g.det_minus_one(),
                    Stability::Standard => g.plus_identity().determinant() - S::one(),
                };
                if let Some(l) = (0..S::LANES).find(|&l| !(jm1.lane(l) > -1.0)) {
                    return Err(OperatorError::NonPositiveJacobian { element: elems[l], qp: q });
                }
                let flux = match form.domain {
                    Domain::Material => {
                        let s = second_pk(mat, &g, form.stability, kcfg)?;
                        let jxw = lanes_scalar::<S>(&geo.jxw, elems, q, nq3);
                        g.plus_identity().mul_sym(&s).mul_tr(&j0_inv).scale(jxw)
                    }
                    Domain::Spatial => {
                        let tau = kirchhoff(mat, &g, form.stability, kcfg)?;
                        let jt = lanes_tensor::<S>(&geo.j0, elems, q, nq3) + gxi;
                        let det = jt.determinant();
                        if let Some(l) = (0..S::LANES).find(|&l| !(det.lane(l) > 0.0)) {
                            return Err(OperatorError::NonPositiveJacobian { element: elems[l], qp: q });
                        }
                        let jt_inv = jt.inverse_unchecked_with_det(det);
                        let weight = det * S::lit(self.qweights[q]) / (jm1 + S::one());
                        tau.to_tensor().mul_tr(&jt_inv).scale(weight)
                    }
                };
                write_tensor(&mut w.grad, q, nq3, &flux);
            }
            w.integrate_grad(&tables);
            Ok(())
        })?;
        for (ri, li) in r.iter_mut().zip(&self.load) {
            *ri -= li;
        }
        self.level.dirichlet.zero(&mut r);
        Ok(r)
    }

    /// `K x` in double precision.
    pub fn apply_tangent(&self, x: &[f64]) -> Result<Vec<f64>, OperatorError> {
        let mut y = vec![0.0; x.len()];
        self.apply_tangent_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = K x` in the precision of `T`; cached double-precision data is
    /// rounded to `T` when loaded. Constrained rows and columns act as identity.
    pub fn apply_tangent_into<T: LaneReal>(&self, x: &[T], y: &mut [T]) -> Result<(), OperatorError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        self.check_linearized()?;
        let mask = &self.level.dirichlet.mask;
        let mut xm = x.to_vec();
        self.level.dirichlet.zero(&mut xm);
        y.iter_mut().for_each(|v| *v = T::zero());
        let tables = Tables::<T::Lanes>::new(&self.level.basis);
        self.element_loop(&tables, y, |elems, w| self.tangent_kernel(&tables, &xm, elems, w))?;
        for i in 0..y.len() {
            if mask[i] {
                y[i] = x[i];
            }
        }
        Ok(())
    }

    #[inline(always)]
    fn tangent_kernel<S: Scalar>(
        &self,
        tables: &Tables<S>,
        x: &[S::Elem],
        elems: &[usize],
        w: &mut Work<S>,
    ) -> Result<(), OperatorError> {
        let nq3 = self.level.qp_per_element();
        let geo = &self.level.geometry;
        let (mat, kcfg) = (&self.material, &self.config.kernel);
        let needs_u_k = self.needs_u_k();
        if needs_u_k {
            self.gather(&self.u_k, elems, &mut w.xe, S::Elem::from_f64);
            w.gradients_k(tables);
        }
        self.gather(x, elems, &mut w.xe, |v| v);
        w.gradients_of_xe(tables);
        let mut refs: [&QpCache; MAX_LANES] = [&self.caches[0]; MAX_LANES];
        for q in 0..nq3 {
            for (l, &e) in elems.iter().enumerate() {
                refs[l] = &self.caches[e * nq3 + q];
            }
            let caches = &refs[..S::LANES];
            let gxi = read_tensor(&w.grad, q, nq3);
            let g = if needs_u_k {
                read_tensor(&w.grad_k, q, nq3) * lanes_tensor::<S>(&geo.j0_inv, elems, q, nq3)
            } else {
                Tensor2::zero()
            };
            let flux = match self.config.formulation.domain {
                Domain::Material => {
                    let j0_inv = lanes_tensor::<S>(&geo.j0_inv, elems, q, nq3);
                    let lin = MaterialLin::from_cache_lanes(mat, caches, &g, kcfg)?;
                    let jxw = lanes_scalar::<S>(&geo.jxw, elems, q, nq3);
                    lin.apply(&(gxi * j0_inv)).mul_tr(&j0_inv).scale(jxw)
                }
                Domain::Spatial => {
                    let (jt_inv, jxw) = self.lanes_spatial::<S>(elems, q, nq3);
                    let lin = SpatialLin::from_cache_lanes(mat, caches, &g, kcfg)?;
                    lin.apply(&(gxi * jt_inv)).mul_tr(&jt_inv).scale(jxw * lin.scalars.inv_j)
                }
            };
            write_tensor(&mut w.grad, q, nq3, &flux);
        }
        w.integrate_grad(tables);
        Ok(())
    }

    fn lanes_spatial<S: Scalar>(&self, elems: &[usize], q: usize, nq3: usize) -> (Tensor2<S>, S) {
        let mut t = Tensor2::<S>::zero();
        let mut w = S::zero();
        for (l, &e) in elems.iter().enumerate() {
            let p = &self.spatial[e * nq3 + q];
            t.set_lane(l, &p.jt_inv.to_precision());
            w.set_lane(l, S::Elem::from_f64(p.jxw));
        }
        (t, w)
    }

    /// Exact diagonal of `K`, assembled from the per-point linear maps.
    pub fn compute_diagonal(&self) -> Result<DiagonalReport, OperatorError> {
        self.check_linearized()?;
        let tables = Tables::<f64>::new(&self.level.basis);
        let basis = &self.level.basis;
        let (nd, nq) = (basis.n_nodes(), basis.n_q());
        let nd3 = nd.pow(3);
        let nq3 = nq.pow(3);
        let geo = &self.level.geometry;
        let (mat, kcfg) = (&self.material, &self.config.kernel);
        let needs_u_k = self.needs_u_k();
        let mut diag = vec![0.0; self.n_dofs()];
        self.element_loop(&tables, &mut diag, |elems, w: &mut Work<f64>| {
            let e = elems[0];
            if needs_u_k {
                self.gather(&self.u_k, elems, &mut w.xe, |v| v);
                w.gradients_k(&tables);
            }
            w.ye.iter_mut().for_each(|v| *v = 0.0);
            for q in 0..nq3 {
                let idx = e * nq3 + q;
                let cache = [&self.caches[idx]];
                let g = if needs_u_k { read_tensor(&w.grad_k, q, nq3) * geo.j0_inv[idx] } else { Tensor2::zero() };
                let (jinv, weight, apply): (Tensor2<f64>, f64, Box<dyn Fn(&Tensor2<f64>) -> Tensor2<f64>>) =
                    match self.config.formulation.domain {
                        Domain::Material => {
                            let lin = MaterialLin::from_cache_lanes(mat, &cache, &g, kcfg)?;
                            (geo.j0_inv[idx], geo.jxw[idx], Box::new(move |d| lin.apply(d)))
                        }
                        Domain::Spatial => {
                            let lin = SpatialLin::from_cache_lanes(mat, &cache, &g, kcfg)?;
                            let p = &self.spatial[idx];
                            (p.jt_inv, p.jxw * lin.scalars.inv_j, Box::new(move |d| lin.apply(d)))
                        }
                    };
                // a[c][a][b]: component c of the flux in direction a for a unit gradient (c, b)
                let mut a = [[[0.0; 3]; 3]; 3];
                for c in 0..3 {
                    for b in 0..3 {
                        let mut unit = Tensor2::<f64>::zero();
                        unit.m[c][b] = 1.0;
                        let r = apply(&unit);
                        for aa in 0..3 {
                            a[c][aa][b] = r.m[c][aa];
                        }
                    }
                }
                let [qx, qy, qz] = [q % nq, (q / nq) % nq, q / (nq * nq)];
                for n in 0..nd3 {
                    let [i, j, k] = [n % nd, (n / nd) % nd, n / (nd * nd)];
                    let (vx, vy, vz) = (basis.shape[qx * nd + i], basis.shape[qy * nd + j], basis.shape[qz * nd + k]);
                    let (dx, dy, dz) = (basis.grad[qx * nd + i], basis.grad[qy * nd + j], basis.grad[qz * nd + k]);
                    let gref = [dx * vy * vz, vx * dy * vz, vx * vy * dz];
                    let gp: [f64; 3] = std::array::from_fn(|aa| (0..3).map(|d| gref[d] * jinv.m[d][aa]).sum());
                    for c in 0..3 {
                        let mut s = 0.0;
                        for aa in 0..3 {
                            for b in 0..3 {
                                s += gp[aa] * a[c][aa][b] * gp[b];
                            }
                        }
                        w.ye[c * nd3 + n] += weight * s;
                    }
                }
            }
            Ok(())
        })?;
        let mask = &self.level.dirichlet.mask;
        let mut nonpositive = Vec::new();
        for i in 0..diag.len() {
            if mask[i] {
                diag[i] = 1.0;
            } else if !(diag[i] > 0.0) {
                nonpositive.push(i);
            }
        }
        Ok(DiagonalReport { diagonal: diag, nonpositive })
    }

    /// Dense matrix whose column `j` is `K e_j`.
    pub fn assemble_matrix_oracle(&self, cap: usize) -> Result<DMatrix<f64>, OperatorError> {
        let n = self.n_dofs();
        if n > cap {
            return Err(OperatorError::TooLarge { n, cap });
        }
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply_tangent(&e)?;
            e[j] = 0.0;
            m.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        Ok(m)
    }
}

#[inline(always)]
fn read_tensor<S: Scalar>(buf: &[S], q: usize, nq3: usize) -> Tensor2<S> {
    Tensor2 { m: std::array::from_fn(|c| std::array::from_fn(|d| buf[(c * 3 + d) * nq3 + q])) }
}

#[inline(always)]
fn write_tensor<S: Scalar>(buf: &mut [S], q: usize, nq3: usize, t: &Tensor2<S>) {
    for c in 0..3 {
        for d in 0..3 {
            buf[(c * 3 + d) * nq3 + q] = t.m[c][d];
        }
    }
}

#[inline(always)]
fn lanes_tensor<S: Scalar>(v: &[Tensor2<f64>], elems: &[usize], q: usize, nq3: usize) -> Tensor2<S> {
    let mut t = Tensor2::<S>::zero();
    for (l, &e) in elems.iter().enumerate() {
        t.set_lane(l, &v[e * nq3 + q].to_precision());
    }
    t
}

#[inline(always)]
fn lanes_scalar<S: Scalar>(v: &[f64], elems: &[usize], q: usize, nq3: usize) -> S {
    let mut s = S::zero();
    for (l, &e) in elems.iter().enumerate() {
        s.set_lane(l, S::Elem::from_f64(v[e * nq3 + q]));
    }
    s
}
