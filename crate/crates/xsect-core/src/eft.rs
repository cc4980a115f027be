//! Error-free transformations and compensated operators.
//!
//! Every routine here is a pure function over `f64` with a fixed rounding
//! sequence. The building blocks (`two_sum`, `fast_two_sum`, `two_prod`)
//! are exact: the returned pair sums to the true real result. The compensated
//! operators built on top of them carry `O(u^2)` relative error bounds, where
//! `u = 2^-53` is the unit roundoff of binary64.
//!
//! All operations assume round-to-nearest-even and the presence of a
//! correctly rounded FMA (`f64::mul_add`). Inputs with component magnitudes
//! outside `[2^-500, 2^500]` are out of contract (overflow/underflow is not
//! checked in release builds).

/// Unit roundoff of IEEE 754 binary64 under round-to-nearest: `2^-53`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON * 0.5;

/// Unevaluated sum `hi + lo` of two binary64 values, representing one real
/// number to roughly doubled precision.
///
/// Outputs of [`two_sum`], [`fast_two_sum`] and [`two_prod`] are normalized:
/// `hi` is the round-to-nearest of `hi + lo`. Outputs of [`comp_dot_c`] and
/// [`accu_dop`] are not; only the value contract `hi + lo ~ exact` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedPair {
    pub hi: f64,
    pub lo: f64,
}

impl CompensatedPair {
    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub const fn zero() -> Self {
        Self { hi: 0.0, lo: 0.0 }
    }

    /// `hi + lo` evaluated in working precision.
    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    /// Sign of the represented value, decided from `hi` and falling back to
    /// `lo` when `hi` is exactly zero. Faithful for pairs whose value sign
    /// matches the exact sign (all operators here).
    #[inline]
    pub fn sign(self) -> i8 {
        if self.hi > 0.0 {
            1
        } else if self.hi < 0.0 {
            -1
        } else if self.lo > 0.0 {
            1
        } else if self.lo < 0.0 {
            -1
        } else {
            0
        }
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self::new(-self.hi, -self.lo)
    }
}

/// Knuth's TwoSum. `hi = fl(a + b)` and `hi + lo = a + b` exactly, for any
/// finite non-overflowing inputs.
#[inline]
pub fn two_sum(a: f64, b: f64) -> CompensatedPair {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    CompensatedPair::new(s, e)
}

/// Dekker's FastTwoSum. Exact (and normalized, `|lo| <= u*|hi|`) whenever
/// `|a| >= |b|` or the exponent of `a` is at least that of `b`; callers that
/// cannot guarantee this get `hi = fl(a + b)` with a first-order error
/// estimate in `lo`, which is what the compensated `s^2` assembly relies on
/// in the heavily cancelling near-tangent regime.
#[inline]
pub fn fast_two_sum(a: f64, b: f64) -> CompensatedPair {
    let s = a + b;
    let e = b - (s - a);
    CompensatedPair::new(s, e)
}

/// FMA-based TwoProd. `hi = fl(a * b)` and `hi + lo = a * b` exactly
/// (no overflow, product not driven into the subnormal range).
#[inline]
pub fn two_prod(a: f64, b: f64) -> CompensatedPair {
    let p = a * b;
    let e = a.mul_add(b, -p);
    CompensatedPair::new(p, e)
}

/// Kahan's compensated 2x2 determinant: `a*d - b*c` with relative error
/// at most `2u`.
#[inline]
pub fn kahan_dop(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let bc = b * c;
    let err = (-b).mul_add(c, bc);
    let dop = a.mul_add(d, -bc);
    dop + err
}

/// AccuDOP: `a*d - b*c` as a compensated pair with `O(u^2)` relative error.
///
/// The exact residual of `(p1 + r1) - (p2 + r2)` requires `r1 - r2`, so the
/// compensation step evaluates `fl(s + fl(r1 - r2))`. The pair is not
/// normalized.
#[inline]
pub fn accu_dop(a: f64, b: f64, c: f64, d: f64) -> CompensatedPair {
    let p1 = two_prod(a, d);
    let p2 = two_prod(b, c);
    let s = two_sum(p1.hi, -p2.hi);
    let err = s.lo + (p1.lo - p2.lo);
    CompensatedPair::new(s.hi, err)
}

/// Compensated dot product returning an unevaluated pair (CompDotC / Dot2
/// without the final rounding). Relative error of `hi + lo` is bounded by
/// [`compdot_error_bound`].
pub fn comp_dot_c(x: &[f64], y: &[f64]) -> CompensatedPair {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let first = two_prod(x[0], y[0]);
    let mut p = first.hi;
    let mut s = first.lo;
    for i in 1..x.len() {
        let h = two_prod(x[i], y[i]);
        let t = two_sum(p, h.hi);
        p = t.hi;
        s += t.lo + h.lo;
    }
    CompensatedPair::new(p, s)
}

/// Compensated dot product rounded to a single binary64 (CompDot).
#[inline]
pub fn comp_dot(x: &[f64], y: &[f64]) -> f64 {
    comp_dot_c(x, y).value()
}

/// Sums two non-negative normalized pairs with relative error at most `3u^2`.
/// Output is normalized via FastTwoSum.
#[inline]
pub fn sum_non_neg(a: CompensatedPair, b: CompensatedPair) -> CompensatedPair {
    debug_assert!(a.hi >= 0.0 && b.hi >= 0.0, "sum_non_neg requires non-negative inputs");
    let h = two_sum(a.hi, b.hi);
    let c = a.lo + b.lo;
    let d = h.lo + c;
    fast_two_sum(h.hi, d)
}

/// Compensated sum of squares. For `n = 2` the relative error is at most
/// `3u^2`; for `n = 3` at most `6u^2` plus higher-order terms.
pub fn sum_of_squares(x: &[f64]) -> CompensatedPair {
    let mut acc = CompensatedPair::zero();
    for &xj in x {
        let p = two_prod(xj, xj);
        acc = sum_non_neg(acc, p);
    }
    acc
}

/// Compensated sum of squares of `x + e` where `e` holds componentwise
/// compensation terms (`|e_i| <= u*|x_i|` up to slack). The final FastTwoSum
/// normalizes the output so that `|lo| <= u*|hi|`.
pub fn sum_of_squares_c(x: &[f64], e: &[f64]) -> CompensatedPair {
    let s = sum_of_squares(x);
    let r_star = comp_dot(x, e);
    let r = 2.0f64.mul_add(r_star, s.lo);
    fast_two_sum(s.hi, r)
}

/// Accurate square root of a normalized pair `(h_hi, h_lo)` with
/// `|h_lo| <= u*h_hi`: returns a pair approximating `sqrt(h_hi + h_lo)` with
/// relative error at most `(25/8) u^2`.
///
/// `h_hi == 0` returns the zero pair. A negative `h_hi` signals upstream
/// misclassification; the result propagates NaN (debug builds assert).
#[inline]
pub fn acc_sqrt(h_hi: f64, h_lo: f64) -> CompensatedPair {
    debug_assert!(h_hi >= 0.0, "acc_sqrt domain error: H = {h_hi:e}");
    if h_hi == 0.0 {
        return CompensatedPair::zero();
    }
    let s = h_hi.sqrt();
    let r = (-s).mul_add(s, h_hi);
    let lo = (r + h_lo) / (2.0 * s);
    CompensatedPair::new(s, lo)
}

/// Published relative error bound for [`comp_dot_c`] on length-`n` inputs:
/// `gamma_n * (n*u / (1 - (n-1)*u)) * (|x|.|y| / |x^T y|)` with
/// `gamma_n = n*u / (1 - n*u)`.
///
/// `abs_dot` is the dot product of the absolute vectors, `dot` the exact dot
/// product; `dot == 0` yields an infinite sentinel.
pub fn compdot_error_bound(n: usize, abs_dot: f64, dot: f64) -> f64 {
    if dot == 0.0 {
        return f64::INFINITY;
    }
    let u = UNIT_ROUNDOFF;
    let nf = n as f64;
    debug_assert!(nf * u < 1.0);
    let gamma_n = nf * u / (1.0 - nf * u);
    gamma_n * (nf * u / (1.0 - (nf - 1.0) * u)) * (abs_dot / dot.abs())
}

/// Relative error bound for [`comp_dot`]: the pair bound plus one final
/// rounding.
pub fn compdot_rounded_error_bound(n: usize, abs_dot: f64, dot: f64) -> f64 {
    UNIT_ROUNDOFF + compdot_error_bound(n, abs_dot, dot)
}

/// Checks that the FPU is in the IEEE default round-to-nearest-even mode.
/// The analysis behind every bound in this crate assumes it.
pub fn round_to_nearest_active() -> bool {
    let one = 1.0f64;
    let u = UNIT_ROUNDOFF;
    // 1 + u is a tie: round-to-even keeps 1.0. 1 + 3u/2 must round up.
    one + u == one && one + 1.5 * u == one + 2.0 * u && (-one) - u == -one
}
