//! Small dense tensor algebra for three space dimensions.
//!
//! [`Tensor2`] stores all nine entries of a second-order tensor (row-major),
//! [`SymTensor2`] the six unique entries of a symmetric one in the order
//! `(11, 22, 33, 12, 13, 23)`. Symmetric storage never carries a factor of two;
//! the off-diagonal weighting appears only inside [`SymTensor2::ddot`].
//!
//! The strain kernels work on the displacement gradient `G = Grad u` rather
//! than on `F = I + G`, so that nothing of the form `(something ≈ 1) - 1` is
//! ever evaluated. Summation orders are fixed (see each function) so that
//! single/double and batched/unbatched evaluations are reproducible.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::Float;

use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("tensor is singular: |det| = {det:e} is below the floor {floor:e}")]
    Singular { det: f64, floor: f64 },
}

/// General 3×3 tensor, `m[i][j]` is the entry in row `i`, column `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2<S> {
    pub m: [[S; 3]; 3],
}

/// Symmetric 3×3 tensor in `(11, 22, 33, 12, 13, 23)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor2<S> {
    pub v: [S; 6],
}

/// Index into [`SymTensor2::v`] for entry `(i, j)`.
#[inline(always)]
pub const fn sym_index(i: usize, j: usize) -> usize {
    const MAP: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];
    MAP[i][j]
}

impl<S: Scalar> Tensor2<S> {
    #[inline(always)]
    pub fn new(m: [[S; 3]; 3]) -> Self {
        Tensor2 { m }
    }

    #[inline(always)]
    pub fn zero() -> Self {
        Tensor2 { m: [[S::zero(); 3]; 3] }
    }

    #[inline(always)]
    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = S::one();
        }
        t
    }

    pub fn diag(d: [S; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = d[i];
        }
        t
    }

    pub fn from_f64(m: [[f64; 3]; 3]) -> Self {
        Tensor2 { m: m.map(|row| row.map(S::lit)) }
    }

    /// Entry-wise conversion between scalar types.
    pub fn cast<R: Scalar>(&self) -> Tensor2<R>
    where
        S: Scalar<Elem = f64>,
    {
        Tensor2 { m: self.m.map(|row| row.map(|x| R::lit(x.lane(0)))) }
    }

    #[inline(always)]
    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Tensor2 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    #[inline(always)]
    pub fn trace(&self) -> S {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    #[inline(always)]
    pub fn scale(&self, s: S) -> Self {
        Tensor2 { m: self.m.map(|row| row.map(|x| x * s)) }
    }

    /// `I + self`.
    #[inline(always)]
    pub fn plus_identity(&self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            t.m[i][i] += S::one();
        }
        t
    }

    /// `A : B = Σ A_ij B_ij`, summed row by row.
    #[inline(always)]
    pub fn ddot(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc += self.m[i][j] * other.m[i][j];
            }
        }
        acc
    }

    /// Determinant by cofactor expansion along the first row:
    /// `a00 (a11 a22 - a12 a21) - a01 (a10 a22 - a12 a20) + a02 (a10 a21 - a11 a20)`.
    #[inline(always)]
    pub fn determinant(&self) -> S {
        let a = &self.m;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// `det(I + G) - 1` for `self = G`, evaluated as
    /// `tr G + (sum of principal 2×2 minors of G) + det G`.
    #[inline(always)]
    pub fn det_minus_one(&self) -> S {
        let g = &self.m;
        let tr = g[0][0] + g[1][1] + g[2][2];
        let minors = (g[0][0] * g[1][1] - g[0][1] * g[1][0])
            + (g[0][0] * g[2][2] - g[0][2] * g[2][0])
            + (g[1][1] * g[2][2] - g[1][2] * g[2][1]);
        tr + minors + self.determinant()
    }

    /// Transposed cofactor matrix, `adj(A) A = det(A) I`.
    #[inline(always)]
    pub fn adjugate(&self) -> Self {
        let a = &self.m;
        Tensor2 {
            m: [
                [
                    a[1][1] * a[2][2] - a[1][2] * a[2][1],
                    a[0][2] * a[2][1] - a[0][1] * a[2][2],
                    a[0][1] * a[1][2] - a[0][2] * a[1][1],
                ],
                [
                    a[1][2] * a[2][0] - a[1][0] * a[2][2],
                    a[0][0] * a[2][2] - a[0][2] * a[2][0],
                    a[0][2] * a[1][0] - a[0][0] * a[1][2],
                ],
                [
                    a[1][0] * a[2][1] - a[1][1] * a[2][0],
                    a[0][1] * a[2][0] - a[0][0] * a[2][1],
                    a[0][0] * a[1][1] - a[0][1] * a[1][0],
                ],
            ],
        }
    }

    /// Inverse with the default floor of the element precision.
    pub fn inverse(&self) -> Result<Self, TensorError> {
        self.inverse_with_floor(S::Elem::DET_FLOOR)
    }

    /// Adjugate over determinant. Fails if `|det|` is below `floor` on any lane.
    pub fn inverse_with_floor(&self, floor: f64) -> Result<Self, TensorError> {
        let det = self.determinant();
        let fl = S::Elem::from_f64(floor);
        if det.any(|d| !(d.abs() >= fl)) {
            let worst = (0..S::LANES)
                .map(|i| det.lane(i).to_f64())
                .fold(f64::INFINITY, |m, d| if d.abs() < m.abs() { d } else { m });
            return Err(TensorError::Singular { det: worst, floor });
        }
        Ok(self.inverse_unchecked_with_det(det))
    }

    /// Adjugate divided by a determinant the caller already knows to be safe.
    #[inline(always)]
    pub fn inverse_unchecked_with_det(&self, det: S) -> Self {
        let inv_det = det.recip();
        self.adjugate().scale(inv_det)
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    #[inline(always)]
    pub fn sym_part(&self) -> SymTensor2<S> {
        let a = &self.m;
        let h = S::lit(0.5);
        SymTensor2 {
            v: [
                a[0][0],
                a[1][1],
                a[2][2],
                h * (a[0][1] + a[1][0]),
                h * (a[0][2] + a[2][0]),
                h * (a[1][2] + a[2][1]),
            ],
        }
    }

    /// Product with a symmetric tensor, `A S`.
    #[inline(always)]
    pub fn mul_sym(&self, s: &SymTensor2<S>) -> Self {
        *self * s.to_tensor()
    }

    /// `Aᵀ B` without forming the transpose.
    #[inline(always)]
    pub fn tr_mul(&self, b: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] =
                    self.m[0][i] * b.m[0][j] + self.m[1][i] * b.m[1][j] + self.m[2][i] * b.m[2][j];
            }
        }
        out
    }

    /// `A Bᵀ` without forming the transpose.
    #[inline(always)]
    pub fn mul_tr(&self, b: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] =
                    self.m[i][0] * b.m[j][0] + self.m[i][1] * b.m[j][1] + self.m[i][2] * b.m[j][2];
            }
        }
        out
    }

    /// `A v`.
    #[inline(always)]
    pub fn mul_vec(&self, v: &[S; 3]) -> [S; 3] {
        std::array::from_fn(|i| self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2])
    }

    /// Largest absolute entry over all lanes, in `f64`.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|x| x.max_abs_lane().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        !self.m.iter().flatten().any(|x| x.any(|v| !v.is_finite()))
    }

    /// Lane `l` of a batched tensor.
    pub fn lane(&self, l: usize) -> Tensor2<S::Elem> {
        Tensor2 { m: self.m.map(|row| row.map(|x| x.lane(l))) }
    }

    pub fn set_lane(&mut self, l: usize, t: &Tensor2<S::Elem>) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j].set_lane(l, t.m[i][j]);
            }
        }
    }
}

impl<T: Real> Tensor2<T> {
    /// Converts the entries to another element precision.
    pub fn to_precision<R: Real>(&self) -> Tensor2<R> {
        Tensor2 { m: self.m.map(|row| row.map(|x| R::from_f64(x.to_f64()))) }
    }
}

impl<S: Scalar> Mul for Tensor2<S> {
    type Output = Self;
    /// Matrix product; each entry sums `k = 0, 1, 2` in order.
    #[inline(always)]
    fn mul(self, b: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] =
                    self.m[i][0] * b.m[0][j] + self.m[i][1] * b.m[1][j] + self.m[i][2] * b.m[2][j];
            }
        }
        out
    }
}

impl<S: Scalar> Add for Tensor2<S> {
    type Output = Self;
    #[inline(always)]
    fn add(mut self, b: Self) -> Self {
        self += b;
        self
    }
}

impl<S: Scalar> AddAssign for Tensor2<S> {
    #[inline(always)]
    fn add_assign(&mut self, b: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += b.m[i][j];
            }
        }
    }
}

impl<S: Scalar> Sub for Tensor2<S> {
    type Output = Self;
    #[inline(always)]
    fn sub(mut self, b: Self) -> Self {
        self -= b;
        self
    }
}

impl<S: Scalar> SubAssign for Tensor2<S> {
    #[inline(always)]
    fn sub_assign(&mut self, b: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] -= b.m[i][j];
            }
        }
    }
}

impl<S: Scalar> Neg for Tensor2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Tensor2 { m: self.m.map(|row| row.map(|x| -x)) }
    }
}

impl<S: Scalar> SymTensor2<S> {
    #[inline(always)]
    pub fn new(v: [S; 6]) -> Self {
        SymTensor2 { v }
    }

    #[inline(always)]
    pub fn zero() -> Self {
        SymTensor2 { v: [S::zero(); 6] }
    }

    #[inline(always)]
    pub fn identity() -> Self {
        let (o, z) = (S::one(), S::zero());
        SymTensor2 { v: [o, o, o, z, z, z] }
    }

    pub fn from_f64(v: [f64; 6]) -> Self {
        SymTensor2 { v: v.map(S::lit) }
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.v[sym_index(i, j)]
    }

    /// Outer product `a ⊗ a`.
    pub fn outer(a: &[S; 3]) -> Self {
        SymTensor2 {
            v: [a[0] * a[0], a[1] * a[1], a[2] * a[2], a[0] * a[1], a[0] * a[2], a[1] * a[2]],
        }
    }

    /// Full storage copy; exact.
    #[inline(always)]
    pub fn to_tensor(&self) -> Tensor2<S> {
        let v = &self.v;
        Tensor2 { m: [[v[0], v[3], v[4]], [v[3], v[1], v[5]], [v[4], v[5], v[2]]] }
    }

    #[inline(always)]
    pub fn trace(&self) -> S {
        self.v[0] + self.v[1] + self.v[2]
    }

    #[inline(always)]
    pub fn scale(&self, s: S) -> Self {
        SymTensor2 { v: self.v.map(|x| x * s) }
    }

    /// `self + s I`.
    #[inline(always)]
    pub fn add_identity(&self, s: S) -> Self {
        let mut out = *self;
        out.v[0] += s;
        out.v[1] += s;
        out.v[2] += s;
        out
    }

    /// `A : B`, diagonal terms first, then twice the off-diagonal terms.
    #[inline(always)]
    pub fn ddot(&self, b: &Self) -> S {
        let a = &self.v;
        let b = &b.v;
        let diag = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let off = a[3] * b[3] + a[4] * b[4] + a[5] * b[5];
        diag + (off + off)
    }

    /// `A : B` for a general `B` (only the symmetric part of `B` contributes).
    #[inline(always)]
    pub fn ddot_general(&self, b: &Tensor2<S>) -> S {
        self.ddot(&b.sym_part())
    }

    /// Symmetrized product `sym(A B)`.
    #[inline(always)]
    pub fn sym_mul(&self, b: &Self) -> Self {
        (self.to_tensor() * b.to_tensor()).sym_part()
    }

    /// `F H Fᵀ`, symmetrized.
    #[inline(always)]
    pub fn push_forward(&self, f: &Tensor2<S>) -> Self {
        push_forward(f, self)
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().map(|x| x.max_abs_lane().to_f64()).fold(0.0, f64::max)
    }

    pub fn lane(&self, l: usize) -> SymTensor2<S::Elem> {
        SymTensor2 { v: self.v.map(|x| x.lane(l)) }
    }

    pub fn set_lane(&mut self, l: usize, t: &SymTensor2<S::Elem>) {
        for k in 0..6 {
            self.v[k].set_lane(l, t.v[k]);
        }
    }
}

impl<T: Real> SymTensor2<T> {
    pub fn to_precision<R: Real>(&self) -> SymTensor2<R> {
        SymTensor2 { v: self.v.map(|x| R::from_f64(x.to_f64())) }
    }
}

impl<S: Scalar> Add for SymTensor2<S> {
    type Output = Self;
    #[inline(always)]
    fn add(mut self, b: Self) -> Self {
        for k in 0..6 {
            self.v[k] += b.v[k];
        }
        self
    }
}

impl<S: Scalar> AddAssign for SymTensor2<S> {
    #[inline(always)]
    fn add_assign(&mut self, b: Self) {
        for k in 0..6 {
            self.v[k] += b.v[k];
        }
    }
}

impl<S: Scalar> Sub for SymTensor2<S> {
    type Output = Self;
    #[inline(always)]
    fn sub(mut self, b: Self) -> Self {
        for k in 0..6 {
            self.v[k] -= b.v[k];
        }
        self
    }
}

impl<S: Scalar> Neg for SymTensor2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        SymTensor2 { v: self.v.map(|x| -x) }
    }
}

/// `C⁻¹ = F⁻¹ F⁻ᵀ` from the inverse deformation gradient, symmetrized.
/// The right Cauchy–Green tensor itself is never inverted.
#[inline(always)]
pub fn inverse_c_stable<S: Scalar>(f_inv: &Tensor2<S>) -> SymTensor2<S> {
    f_inv.mul_tr(f_inv).sym_part()
}

/// Green–Lagrange strain `E = (G + Gᵀ + GᵀG)/2` from `G = Grad u`.
#[inline(always)]
pub fn green_lagrange_stable<S: Scalar>(g: &Tensor2<S>) -> SymTensor2<S> {
    let gtg = g.tr_mul(g);
    strain_from_parts(g, &gtg)
}

/// Green–Euler strain `b̃ = (G + Gᵀ + G Gᵀ)/2`; the left Cauchy–Green tensor is never formed.
#[inline(always)]
pub fn green_euler_stable<S: Scalar>(g: &Tensor2<S>) -> SymTensor2<S> {
    let ggt = g.mul_tr(g);
    strain_from_parts(g, &ggt)
}

#[inline(always)]
fn strain_from_parts<S: Scalar>(g: &Tensor2<S>, quad: &Tensor2<S>) -> SymTensor2<S> {
    let h = S::lit(0.5);
    let a = &g.m;
    let q = &quad.m;
    SymTensor2 {
        v: [
            h * ((a[0][0] + a[0][0]) + q[0][0]),
            h * ((a[1][1] + a[1][1]) + q[1][1]),
            h * ((a[2][2] + a[2][2]) + q[2][2]),
            h * ((a[0][1] + a[1][0]) + q[0][1]),
            h * ((a[0][2] + a[2][0]) + q[0][2]),
            h * ((a[1][2] + a[2][1]) + q[1][2]),
        ],
    }
}

/// Rank-two push-forward `F H Fᵀ`, symmetrized.
#[inline(always)]
pub fn push_forward<S: Scalar>(f: &Tensor2<S>, h: &SymTensor2<S>) -> SymTensor2<S> {
    let fh = *f * h.to_tensor();
    fh.mul_tr(f).sym_part()
}

/// Product of two symmetric tensors that commute (e.g. `C⁻¹` and a polynomial
/// in `C`), returned as the symmetric part of `A B`.
#[inline(always)]
pub fn commuting_product<S: Scalar>(a: &SymTensor2<S>, b: &SymTensor2<S>) -> SymTensor2<S> {
    a.sym_mul(b)
}
