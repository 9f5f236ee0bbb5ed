use crate::fastscalar::KernelConfig;
use crate::tensor::{SymTensor2, Tensor2};

use super::model::{
    euler_strain, inverses, kinematics, kirchhoff_from_parts, pushed_structure, stress_from_parts,
    PointScalars,
};
use super::{ConstitutiveError, Domain, Formulation, Material, ModelKind, Stability, Strategy};

/// Tensors kept by the tensor strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CacheTensors {
    Material {
        f: Tensor2<f64>,
        s: SymTensor2<f64>,
        f_inv: Tensor2<f64>,
        c_inv: SymTensor2<f64>,
    },
    Spatial {
        tau: SymTensor2<f64>,
        b_tilde: SymTensor2<f64>,
        fhf: [SymTensor2<f64>; 2],
    },
}

/// Linearization data of one quadrature point, always in double precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpCache {
    pub model: ModelKind,
    pub domain: Domain,
    pub stability: Stability,
    pub strategy: Strategy,
    pub scalars: PointScalars<f64>,
    pub tensors: Option<CacheTensors>,
}

impl QpCache {
    pub(crate) fn check(&self, model: ModelKind, domain: Domain) -> Result<(), ConstitutiveError> {
        if self.model != model || self.domain != domain {
            return Err(ConstitutiveError::CacheMismatch {
                expected: format!("{model}/{domain}"),
                found: format!("{}/{}", self.model, self.domain),
            });
        }
        Ok(())
    }

    /// Storage per quadrature point in bytes, from the field list of its cell.
    pub fn byte_size(&self) -> usize {
        byte_ledger(self.model, self.domain, self.strategy).storage()
    }
}

/// Linearization data for `g` in the given formulation and strategy.
pub fn compute_cache(
    mat: &Material,
    g: &Tensor2<f64>,
    strategy: Strategy,
    form: Formulation,
    cfg: &KernelConfig,
) -> Result<QpCache, ConstitutiveError> {
    let k = kinematics(mat, g, form.stability, cfg)?;
    let tensors = match (strategy, form.domain) {
        (Strategy::Tensor, Domain::Material) => {
            let (f_inv, c_inv) = inverses(&k.f, k.scalars.j_minus_1, form.stability);
            let s = stress_from_parts(mat, &k.e, &c_inv, &k.scalars, form.stability);
            Some(CacheTensors::Material { f: k.f, s, f_inv, c_inv })
        }
        (Strategy::Tensor, Domain::Spatial) => {
            let b_tilde = euler_strain(g, &k.f, form.stability);
            let fhf = pushed_structure(mat, &k.f);
            let tau = kirchhoff_from_parts(mat, &k.f, &b_tilde, &fhf, &k.scalars, form.stability);
            Some(CacheTensors::Spatial { tau, b_tilde, fhf })
        }
        _ => None,
    };
    let scalars = if strategy == Strategy::None { PointScalars::zero() } else { k.scalars };
    Ok(QpCache {
        model: mat.model,
        domain: form.domain,
        stability: form.stability,
        strategy,
        scalars,
        tensors,
    })
}

/// One stored field of a quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerField {
    pub name: &'static str,
    pub bytes: usize,
    /// Loaded by every linearized operator application.
    pub in_traffic: bool,
}

/// Analytic per-quadrature-point storage and traffic of one cell
/// (model × domain × strategy), double precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteLedger {
    pub model: ModelKind,
    pub domain: Domain,
    pub strategy: Strategy,
    pub fields: Vec<LedgerField>,
}

const SCALAR: usize = 8;
const VECTOR: usize = 24;
const SYM: usize = 48;
const GENERAL: usize = 72;

impl ByteLedger {
    pub fn storage(&self) -> usize {
        self.fields.iter().map(|f| f.bytes).sum()
    }

    pub fn traffic(&self) -> usize {
        self.fields.iter().filter(|f| f.in_traffic).map(|f| f.bytes).sum()
    }
}

pub fn byte_ledger(model: ModelKind, domain: Domain, strategy: Strategy) -> ByteLedger {
    let mut fields = Vec::new();
    let mut add = |name, bytes, in_traffic| fields.push(LedgerField { name, bytes, in_traffic });
    let tensor = strategy == Strategy::Tensor;
    let cached = strategy != Strategy::None;
    let incompressible = model != ModelKind::CompressibleNeoHooke;

    match domain {
        Domain::Material => {
            add("J0", GENERAL, true);
            if !tensor {
                add("u_k", VECTOR, true);
            }
            if cached {
                if incompressible {
                    add("J-1", SCALAR, false);
                    add("J^-2/3", SCALAR, true);
                    add("c1", SCALAR, true);
                    add("c2", SCALAR, true);
                } else {
                    add("lnJ", SCALAR, true);
                }
            }
            if tensor {
                add("F", GENERAL, true);
                add("S", SYM, true);
                add("F^-1", GENERAL, true);
                add("C^-1", SYM, true);
            }
        }
        Domain::Spatial => {
            add("J0", GENERAL, !tensor);
            add("Jt", GENERAL, true);
            if !tensor {
                add("u_k", VECTOR, true);
            }
            if cached {
                add("1/J", SCALAR, true);
                if incompressible {
                    add("J-1", SCALAR, !tensor);
                    add("J^-2/3", SCALAR, true);
                    add("c1", SCALAR, true);
                    add("c2", SCALAR, true);
                } else {
                    add("lnJ", SCALAR, true);
                }
            }
            if tensor {
                add("tau", SYM, true);
                if incompressible {
                    add("C", SYM, true);
                }
            }
        }
    }
    if model == ModelKind::Fiber && cached {
        for _ in 0..2 {
            add("c3", SCALAR, true);
            add("I*", SCALAR, strategy == Strategy::Scalar && domain == Domain::Spatial);
            add("E_i", SCALAR, true);
            add("H_i", SYM, !(tensor && domain == Domain::Spatial));
            if tensor && domain == Domain::Spatial {
                add("FHF^T", SYM, true);
            }
        }
    }
    ByteLedger { model, domain, strategy, fields }
}
