//! Scalar kernels used inside the constitutive evaluations: a cancellation-free
//! `ln(1 + x)`, a Newton approximation of `J^(-2/3)`, a fast exponential, and the
//! special functions behind the fiber dispersion coefficients.


use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ScalarError {
    #[error("{function} is undefined for argument {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid kernel configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpMode {
    #[default]
    Exact,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JpowMode {
    #[default]
    Newton,
    Exact,
}

/// Switches for the scalar kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    /// Number of odd-power terms in the `ln(1 + x)` series.
    pub ln_series_terms: usize,
    /// Newton steps `N` of [`fast_jpow`].
    pub jpow_newton_steps: usize,
    pub exp_mode: ExpMode,
    pub jpow_mode: JpowMode,
}

/// Term count that keeps the series within 2 ulp of `ln(1 + x)` for `|x| <= 0.5`
/// in double precision (see the calibration test).
pub const DEFAULT_LN_TERMS: usize = 16;

/// Above this magnitude the series is replaced by the platform `ln_1p`.
pub const LN_SERIES_SWITCH: f64 = 0.5;

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            ln_series_terms: DEFAULT_LN_TERMS,
            jpow_newton_steps: 3,
            exp_mode: ExpMode::Exact,
            jpow_mode: JpowMode::Newton,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), ScalarError> {
        if self.ln_series_terms == 0 {
            return Err(ScalarError::Config("ln_series_terms must be at least 1"));
        }
        if self.jpow_newton_steps == 0 {
            return Err(ScalarError::Config("jpow_newton_steps must be at least 1"));
        }
        Ok(())
    }
}

/// `ln(1 + x)` with a domain check on every lane.
pub fn ln_plus_one<S: Scalar>(x: S, cfg: &KernelConfig) -> Result<S, ScalarError> {
    for l in 0..S::LANES {
        let v = x.lane(l);
        if !(v > S::Elem::from_f64(-1.0)) {
            return Err(ScalarError::Domain { function: "ln_plus_one", value: v.to_f64() });
        }
    }
    Ok(ln_plus_one_unchecked(x, cfg.ln_series_terms))
}

/// `ln(1 + x) = 2 Σ t^(2n+1)/(2n+1)` with `t = x/(2 + x)`, for `x > -1`.
///
/// The sum is evaluated in Horner form from the highest power down, so terms
/// are accumulated smallest first. For `|x| > 0.5` the platform `ln_1p` is used.
#[inline(always)]
pub fn ln_plus_one_unchecked<S: Scalar>(x: S, terms: usize) -> S {
    x.map(|v| ln_plus_one_elem(v, terms))
}

#[inline(always)]
fn ln_plus_one_elem<T: Real>(x: T, terms: usize) -> T {
    if x.abs() > T::from_f64(LN_SERIES_SWITCH) {
        return x.ln_1p();
    }
    let t = x / (T::from_f64(2.0) + x);
    let t2 = t * t;
    let mut acc = T::zero();
    for n in (0..terms).rev() {
        acc = acc * t2 + T::one() / T::from_f64((2 * n + 1) as f64);
    }
    let two_t = t + t;
    two_t * acc
}

/// Approximation of `J^(-2/3)` from `J₋₁ = J - 1` by `steps` Newton steps
/// started at `x₀ = 1`. Accurate near `J = 1` only.
#[inline(always)]
pub fn fast_jpow<S: Scalar>(j_minus_1: S, steps: usize) -> S {
    let third = S::lit(1.0 / 3.0);
    let four_thirds = S::lit(4.0 / 3.0);
    // alpha = J^2 / 3
    let alpha = third * ((j_minus_1 + S::lit(2.0)) * j_minus_1 + S::one());
    let mut beta = four_thirds - alpha;
    for _ in 1..steps {
        let b2 = beta * beta;
        let gamma = b2 * b2;
        beta = four_thirds * beta - alpha * gamma;
    }
    beta
}

/// `J^(-2/3)` according to the configured mode.
#[inline(always)]
pub fn jpow<S: Scalar>(j_minus_1: S, cfg: &KernelConfig) -> S {
    match cfg.jpow_mode {
        JpowMode::Newton => fast_jpow(j_minus_1, cfg.jpow_newton_steps),
        JpowMode::Exact => (j_minus_1 + S::one()).powf(-2.0 / 3.0),
    }
}

/// Coefficients of `2^f ≈ Σ c_k f^k` on `f ∈ [-1/2, 1/2]`, relative minimax fit.
const EXP2_POLY: [f64; 6] = [
    1.000_000_071_654_916_4,
    0.693_146_967_064_211_9,
    0.240_221_197_226_870_44,
    0.055_507_132_738_374_74,
    0.009_675_541_397_026_264,
    0.001_327_647_205_845_385_4,
];

/// Exponential according to the configured mode.
#[inline(always)]
pub fn exp<S: Scalar>(x: S, cfg: &KernelConfig) -> S {
    match cfg.exp_mode {
        ExpMode::Exact => x.exp(),
        ExpMode::Fast => fast_exp(x),
    }
}

/// Fast exponential: `x log2(e) = n + f` with integer `n` and `|f| <= 1/2`,
/// `2^n` is written into the exponent field and `2^f` comes from a degree-5
/// polynomial. Relative error below `1e-7`. Outside the normal exponent range
/// the platform `exp` is used, so overflow gives `+inf` as in exact mode.
#[inline(always)]
pub fn fast_exp<S: Scalar>(x: S) -> S {
    x.map(fast_exp_elem)
}

#[inline(always)]
fn fast_exp_elem<T: Real>(x: T) -> T {
    let t = x * T::from_f64(std::f64::consts::LOG2_E);
    let n = t.round();
    let (lo, hi) = T::EXP2_RANGE;
    if !(n >= T::from_f64(lo as f64) && n <= T::from_f64(hi as f64)) {
        return x.exp();
    }
    let f = t - n;
    let mut p = T::from_f64(EXP2_POLY[5]);
    for k in (0..5).rev() {
        p = p * f + T::from_f64(EXP2_POLY[k]);
    }
    if x == T::zero() {
        return T::one();
    }
    p * T::exp2_int(n.to_i32().unwrap_or(0))
}

/// Ratio `I₁(a)/I₀(a)` of modified Bessel functions of the first kind.
///
/// Power series for `a <= 15`, asymptotic expansions of both functions above.
pub fn bessel_ratio(a: f64) -> Result<f64, ScalarError> {
    if !(a >= 0.0) {
        return Err(ScalarError::Domain { function: "bessel_ratio", value: a });
    }
    Ok(if a <= BESSEL_SWITCH { bessel_ratio_series(a) } else { bessel_ratio_asymptotic(a) })
}

pub const BESSEL_SWITCH: f64 = 15.0;

fn bessel_ratio_series(a: f64) -> f64 {
    // I0 = Σ q^k/(k!)^2, I1 = (a/2) Σ q^k/(k!(k+1)!), q = a^2/4
    let q = 0.25 * a * a;
    let (mut t0, mut t1) = (1.0, 1.0);
    let (mut s0, mut s1) = (1.0, 1.0);
    for k in 1..200 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 < 1e-18 * s0 && t1 < 1e-18 * s1 {
            break;
        }
    }
    0.5 * a * s1 / s0
}

fn bessel_ratio_asymptotic(a: f64) -> f64 {
    // I_ν(a) ~ e^a/√(2πa) Σ (-1)^k a_k(ν)/a^k, a_k = Π_{j=1..k} (4ν² - (2j-1)²) / (k! 8^k)
    let series = |nu2x4: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let j = (2 * k - 1) as f64;
            let next = -term * (nu2x4 - j * j) / (k as f64 * 8.0 * a);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    };
    series(4.0) / series(0.0)
}

/// Error function for `x >= 0`, absolute error below `1e-10`.
///
/// Series `erf x = 2/√π e^(-x²) Σ 2^n x^(2n+1) / (1·3·…·(2n+1))` for `x < 6`, `1` beyond.
pub fn erf_approx(x: f64) -> Result<f64, ScalarError> {
    if !(x >= 0.0) {
        return Err(ScalarError::Domain { function: "erf_approx", value: x });
    }
    if x >= 6.0 {
        return Ok(1.0);
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..500 {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    Ok((2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum).min(1.0))
}
