use crate::fastscalar::{bessel_ratio, erf_approx};
use crate::tensor::SymTensor2;

use super::{ConstitutiveError, MaterialParams};

/// Generalized structure tensors of the two fiber families.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensors {
    /// `H` for family 4 (`+Φ`) and family 6 (`-Φ`).
    pub h: [SymTensor2<f64>; 2],
    /// Mean fiber direction of each family.
    pub m1: [[f64; 3]; 2],
    /// `M1 ⊗ M1` of each family.
    pub m1m1: [SymTensor2<f64>; 2],
    pub h11: f64,
    pub h22: f64,
    pub h33: f64,
}

/// Dispersion coefficients from the von Mises concentrations `a` (in-plane)
/// and `b` (out-of-plane), and the structure tensors in the rotated frames.
pub fn build_structure_tensors(p: &MaterialParams) -> Result<StructureTensors, ConstitutiveError> {
    if !(p.a > 0.0) || !(p.b > 0.0) {
        return Err(ConstitutiveError::InvalidParams(
            "dispersion parameters a and b must be positive".into(),
        ));
    }
    let b = p.b;
    let h33 = 0.25 / b
        - (-2.0 * b).exp() / ((2.0 * std::f64::consts::PI * b).sqrt() * erf_approx((2.0 * b).sqrt())?);
    let ratio = bessel_ratio(p.a)?;
    let h11 = 0.5 * (1.0 - h33) * (1.0 + ratio);
    let h22 = 0.5 * (1.0 - h33) * (1.0 - ratio);

    let [e1, e2, e3] = p.frame;
    let (s, c) = p.phi.sin_cos();
    let mut h = [SymTensor2::zero(); 2];
    let mut m1s = [[0.0; 3]; 2];
    let mut m1m1 = [SymTensor2::zero(); 2];
    for (fam, sign) in [1.0, -1.0].into_iter().enumerate() {
        let m1: [f64; 3] = std::array::from_fn(|k| c * e1[k] + sign * s * e2[k]);
        let m2: [f64; 3] = std::array::from_fn(|k| -sign * s * e1[k] + c * e2[k]);
        let a1 = SymTensor2::outer(&m1);
        h[fam] = a1.scale(h11) + SymTensor2::outer(&m2).scale(h22) + SymTensor2::outer(&e3).scale(h33);
        m1s[fam] = m1;
        m1m1[fam] = a1;
    }
    Ok(StructureTensors { h, m1: m1s, m1m1, h11, h22, h33 })
}
