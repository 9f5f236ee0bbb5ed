//! Hyperelastic material models: a compressible neo-Hookean model, a nearly
//! incompressible neo-Hookean model with volumetric penalty, and a tissue model
//! adding two dispersed collagen fiber families to the latter.
//!
//! Every quantity is available in a *standard* form written in terms of `F`,
//! `C` and `J`, and in a *stable* form written in terms of the displacement
//! gradient `G = Grad u`, `J₋₁ = J - 1` and the strain tensors, which avoids
//! the cancellation that ruins the standard form at small strains.

mod cache;
mod lin;
mod model;
mod structure;

pub use cache::{byte_ledger, compute_cache, ByteLedger, CacheTensors, LedgerField, QpCache};
pub use lin::{
    material_lin, spatial_lin, tangent_material, tangent_spatial, FiberLin, MaterialLin,
    SpatialLin,
};
pub use model::{
    energy, kirchhoff, point_scalars, second_pk, st_venant_kirchhoff, FiberScalars, PointScalars,
};
pub use structure::{build_structure_tensors, StructureTensors};

use std::fmt;
use std::str::FromStr;

use crate::fastscalar::ScalarError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstitutiveError {
    #[error("non-positive Jacobian: J - 1 = {j_minus_1:e}")]
    NonPositiveJacobian { j_minus_1: f64 },
    #[error("cache holds {found}, expected {expected}")]
    CacheMismatch { expected: String, found: String },
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// The three material models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Compressible neo-Hookean.
    CompressibleNeoHooke,
    /// Nearly incompressible neo-Hookean with volumetric penalty.
    IncompressibleNeoHooke,
    /// Nearly incompressible neo-Hookean ground matrix with two fiber families.
    Fiber,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] =
        [ModelKind::CompressibleNeoHooke, ModelKind::IncompressibleNeoHooke, ModelKind::Fiber];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::CompressibleNeoHooke => "cNH",
            ModelKind::IncompressibleNeoHooke => "iNH",
            ModelKind::Fiber => "fiber",
        }
    }

    pub fn has_fibers(self) -> bool {
        self == ModelKind::Fiber
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cnh" => Ok(ModelKind::CompressibleNeoHooke),
            "inh" => Ok(ModelKind::IncompressibleNeoHooke),
            "fiber" => Ok(ModelKind::Fiber),
            _ => Err(format!("unknown model `{s}` (expected cNH, iNH or fiber)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stability {
    Standard,
    Stable,
}

/// Configuration in which the weak form is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Material,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formulation {
    pub stability: Stability,
    pub domain: Domain,
}

impl Formulation {
    pub const fn new(stability: Stability, domain: Domain) -> Self {
        Formulation { stability, domain }
    }

    pub const fn stable(domain: Domain) -> Self {
        Formulation { stability: Stability::Stable, domain }
    }

    pub fn tag(&self) -> String {
        format!("{}-{}", self.stability, self.domain)
    }
}

/// What is precomputed per quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Recompute everything from the linearization point.
    None,
    /// Cache scalar coefficients.
    Scalar,
    /// Cache scalars and second-order tensors.
    Tensor,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::None, Strategy::Scalar, Strategy::Tensor];
}

macro_rules! tagged_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($s => Ok($v),)+
                    _ => Err(format!("unknown value `{}` for {}", s, stringify!($t))),
                }
            }
        }
    };
}

tagged_enum!(Stability, Stability::Standard => "standard", Stability::Stable => "stable");
tagged_enum!(Domain, Domain::Material => "material", Domain::Spatial => "spatial");
tagged_enum!(Strategy, Strategy::None => "none", Strategy::Scalar => "scalar", Strategy::Tensor => "tensor");

/// Material constants. Moduli in kPa, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub mu: f64,
    /// Lamé coefficient, compressible model only.
    pub lambda: f64,
    /// Bulk modulus of the volumetric penalty.
    pub kappa: f64,
    pub k1: f64,
    pub k2: f64,
    /// In-plane dispersion concentration.
    pub a: f64,
    /// Out-of-plane dispersion concentration.
    pub b: f64,
    /// Mean in-plane fiber angle.
    pub phi: f64,
    /// Local material frame `E1, E2, E3`.
    pub frame: [[f64; 3]; 3],
}

impl MaterialParams {
    /// Aortic media parameters (kappa corresponds to a Poisson ratio of 0.49).
    pub fn aortic_media() -> Self {
        MaterialParams {
            mu: 62.1,
            lambda: 0.0,
            kappa: 3084.3,
            k1: 1.4,
            k2: 22.1,
            a: 3.62,
            b: 34.3,
            phi: 27.47f64.to_radians(),
            frame: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Shear modulus and Poisson ratio; fills `lambda` and `kappa`.
    pub fn from_poisson(mu: f64, nu: f64) -> Self {
        MaterialParams {
            mu,
            lambda: 2.0 * mu * nu / (1.0 - 2.0 * nu),
            kappa: 2.0 * mu * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu)),
            ..Self::aortic_media()
        }
    }

    /// Defaults used for a model when nothing else is given.
    pub fn default_for(model: ModelKind) -> Self {
        match model {
            ModelKind::CompressibleNeoHooke => Self::from_poisson(62.1, 0.3),
            _ => Self::aortic_media(),
        }
    }

    pub fn validate(&self, model: ModelKind) -> Result<(), ConstitutiveError> {
        let bad = |m: &str| Err(ConstitutiveError::InvalidParams(m.to_string()));
        if !(self.mu > 0.0) {
            return bad("mu must be positive");
        }
        match model {
            ModelKind::CompressibleNeoHooke => {
                if !(self.lambda > 0.0) {
                    return bad("lambda must be positive");
                }
            }
            _ => {
                if !(self.kappa > 0.0) {
                    return bad("kappa must be positive");
                }
            }
        }
        if model == ModelKind::Fiber {
            if !(self.k2 > 0.0) {
                return bad("k2 must be positive");
            }
            if !(self.k1 >= 0.0) {
                return bad("k1 must be non-negative");
            }
            let e = &self.frame;
            for i in 0..3 {
                for j in 0..3 {
                    let d: f64 = (0..3).map(|k| e[i][k] * e[j][k]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    if (d - target).abs() > 1e-12 {
                        return bad("material frame is not orthonormal");
                    }
                }
            }
        }
        Ok(())
    }
}

/// A model with validated parameters and, for the fiber model, its structure tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub model: ModelKind,
    pub params: MaterialParams,
    pub structure: Option<StructureTensors>,
}

impl Material {
    pub fn new(model: ModelKind, params: MaterialParams) -> Result<Self, ConstitutiveError> {
        params.validate(model)?;
        let structure =
            if model.has_fibers() { Some(build_structure_tensors(&params)?) } else { None };
        Ok(Material { model, params, structure })
    }

    pub fn default_for(model: ModelKind) -> Self {
        Self::new(model, MaterialParams::default_for(model)).expect("default parameters are valid")
    }
}
