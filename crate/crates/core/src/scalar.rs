//! Precision-generic scalars and lane batches.
//!
//! Every kernel in this crate is written once against [`Scalar`]. The trait is
//! implemented by the plain floating-point types `f32` and `f64` and by
//! [`Batch`], a fixed-width bundle of lanes that are processed in lockstep.
//! Arithmetic on a batch is applied lane by lane in the same order as on a
//! plain scalar, so a batched evaluation reproduces the unbatched evaluation of
//! every lane bit for bit. Branching code (series with fallbacks, tension
//! switches) goes through [`Scalar::map`] and friends, which run the scalar
//! code path on each lane.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, One, Zero};

/// A floating-point element type: `f32` (single) or `f64` (double).
pub trait Real:
    Float
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Short precision tag used in reports (`"single"` / `"double"`).
    const PRECISION: &'static str;
    /// Default singularity floor for [`crate::tensor::Tensor2::inverse`].
    const DET_FLOOR: f64;
    /// Lane count matching the vector registers of the build target.
    const NATURAL_LANES: usize;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    /// `2^n` for `n` inside the normal exponent range, built from the bit pattern.
    fn exp2_int(n: i32) -> Self;
    /// Smallest and largest `n` accepted by [`Real::exp2_int`].
    const EXP2_RANGE: (i32, i32);
}

impl Real for f64 {
    const PRECISION: &'static str = "double";
    const DET_FLOOR: f64 = 1e-300;
    const NATURAL_LANES: usize = natural_lanes(8);
    const EXP2_RANGE: (i32, i32) = (-1022, 1023);

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn exp2_int(n: i32) -> Self {
        f64::from_bits(((n + 1023) as u64) << 52)
    }
}

impl Real for f32 {
    const PRECISION: &'static str = "single";
    const DET_FLOOR: f64 = 1e-30;
    const NATURAL_LANES: usize = natural_lanes(4);
    const EXP2_RANGE: (i32, i32) = (-126, 127);

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline(always)]
    fn exp2_int(n: i32) -> Self {
        f32::from_bits(((n + 127) as u32) << 23)
    }
}

const fn natural_lanes(bytes: usize) -> usize {
    let register = if cfg!(target_feature = "avx512f") {
        64
    } else if cfg!(target_feature = "avx") {
        32
    } else {
        16
    };
    register / bytes
}

/// Arithmetic value used by all tensor and constitutive kernels.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    type Elem: Real;
    const LANES: usize;

    fn splat(v: Self::Elem) -> Self;
    fn lane(&self, i: usize) -> Self::Elem;
    fn set_lane(&mut self, i: usize, v: Self::Elem);

    /// Applies `f` to every lane.
    fn map<F: Fn(Self::Elem) -> Self::Elem>(self, f: F) -> Self;
    fn zip_map<F: Fn(Self::Elem, Self::Elem) -> Self::Elem>(self, other: Self, f: F) -> Self;
    fn zip3_map<F: Fn(Self::Elem, Self::Elem, Self::Elem) -> Self::Elem>(
        self,
        b: Self,
        c: Self,
        f: F,
    ) -> Self;
    /// True if `pred` holds on any lane.
    fn any<F: Fn(Self::Elem) -> bool>(&self, pred: F) -> bool;

    #[inline(always)]
    fn lit(v: f64) -> Self {
        Self::splat(Self::Elem::from_f64(v))
    }
    #[inline(always)]
    fn zero() -> Self {
        Self::splat(Self::Elem::zero())
    }
    #[inline(always)]
    fn one() -> Self {
        Self::splat(Self::Elem::one())
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        self.map(Float::sqrt)
    }
    #[inline(always)]
    fn abs(self) -> Self {
        self.map(Float::abs)
    }
    #[inline(always)]
    fn ln(self) -> Self {
        self.map(Float::ln)
    }
    #[inline(always)]
    fn exp(self) -> Self {
        self.map(Float::exp)
    }
    #[inline(always)]
    fn powf(self, e: f64) -> Self {
        let e = Self::Elem::from_f64(e);
        self.map(|x| x.powf(e))
    }
    #[inline(always)]
    fn recip(self) -> Self {
        Self::one() / self
    }
    /// Lane-wise maximum of `|self|`.
    fn max_abs_lane(&self) -> Self::Elem {
        (0..Self::LANES).fold(Self::Elem::zero(), |m, i| m.max(self.lane(i).abs()))
    }
}

macro_rules! impl_plain_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Elem = $t;
            const LANES: usize = 1;

            #[inline(always)]
            fn splat(v: $t) -> Self {
                v
            }
            #[inline(always)]
            fn lane(&self, _i: usize) -> $t {
                *self
            }
            #[inline(always)]
            fn set_lane(&mut self, _i: usize, v: $t) {
                *self = v;
            }
            #[inline(always)]
            fn map<F: Fn($t) -> $t>(self, f: F) -> Self {
                f(self)
            }
            #[inline(always)]
            fn zip_map<F: Fn($t, $t) -> $t>(self, other: Self, f: F) -> Self {
                f(self, other)
            }
            #[inline(always)]
            fn zip3_map<F: Fn($t, $t, $t) -> $t>(self, b: Self, c: Self, f: F) -> Self {
                f(self, b, c)
            }
            #[inline(always)]
            fn any<F: Fn($t) -> bool>(&self, pred: F) -> bool {
                pred(*self)
            }
        }
    };
}

impl_plain_scalar!(f32);
impl_plain_scalar!(f64);

/// `N` lanes of `T` evaluated in lockstep.
#[derive(Clone, Copy, Debug, PartialEq)]
#[repr(transparent)]
pub struct Batch<T, const N: usize>(pub [T; N]);

impl<T: Real, const N: usize> Batch<T, N> {
    pub fn from_fn(f: impl FnMut(usize) -> T) -> Self {
        Batch(std::array::from_fn(f))
    }
}

impl<T: Real, const N: usize> Default for Batch<T, N> {
    fn default() -> Self {
        Batch([T::zero(); N])
    }
}

macro_rules! batch_binop {
    ($tr:ident, $f:ident, $atr:ident, $af:ident, $op:tt) => {
        impl<T: Real, const N: usize> $tr for Batch<T, N> {
            type Output = Self;
            #[inline(always)]
            fn $f(self, rhs: Self) -> Self {
                let mut out = self.0;
                for i in 0..N {
                    out[i] = self.0[i] $op rhs.0[i];
                }
                Batch(out)
            }
        }
        impl<T: Real, const N: usize> $atr for Batch<T, N> {
            #[inline(always)]
            fn $af(&mut self, rhs: Self) {
                for i in 0..N {
                    self.0[i] = self.0[i] $op rhs.0[i];
                }
            }
        }
    };
}

batch_binop!(Add, add, AddAssign, add_assign, +);
batch_binop!(Sub, sub, SubAssign, sub_assign, -);
batch_binop!(Mul, mul, MulAssign, mul_assign, *);
batch_binop!(Div, div, DivAssign, div_assign, /);

impl<T: Real, const N: usize> Neg for Batch<T, N> {
    type Output = Self;
    #[inline(always)]
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Real, const N: usize> Scalar for Batch<T, N> {
    type Elem = T;
    const LANES: usize = N;

    #[inline(always)]
    fn splat(v: T) -> Self {
        Batch([v; N])
    }
    #[inline(always)]
    fn lane(&self, i: usize) -> T {
        self.0[i]
    }
    #[inline(always)]
    fn set_lane(&mut self, i: usize, v: T) {
        self.0[i] = v;
    }
    #[inline(always)]
    fn map<F: Fn(T) -> T>(self, f: F) -> Self {
        let mut out = self.0;
        for v in out.iter_mut() {
            *v = f(*v);
        }
        Batch(out)
    }
    #[inline(always)]
    fn zip_map<F: Fn(T, T) -> T>(self, other: Self, f: F) -> Self {
        let mut out = self.0;
        for i in 0..N {
            out[i] = f(self.0[i], other.0[i]);
        }
        Batch(out)
    }
    #[inline(always)]
    fn zip3_map<F: Fn(T, T, T) -> T>(self, b: Self, c: Self, f: F) -> Self {
        let mut out = self.0;
        for i in 0..N {
            out[i] = f(self.0[i], b.0[i], c.0[i]);
        }
        Batch(out)
    }
    #[inline(always)]
    fn any<F: Fn(T) -> bool>(&self, pred: F) -> bool {
        self.0.iter().any(|&x| pred(x))
    }
}
