//! Test-only exact arithmetic: dyadic rationals `m * 2^e` over `BigInt`.
//! Independent of the expansion oracle, so the two can referee each other.
#![allow(dead_code)] // each test binary uses a different subset

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use xsect_core::oracle::Expansion;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub m: BigInt,
    pub e: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self {
            m: BigInt::zero(),
            e: 0,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 != 0 { -1 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        Self {
            m: BigInt::from(sign) * BigInt::from(mant),
            e,
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.e.min(other.e);
        let a = &self.m << (self.e - e) as u32;
        let b = &other.m << (other.e - e) as u32;
        (a, b, e)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, e) = self.aligned(other);
        Self { m: a + b, e }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, e) = self.aligned(other);
        Self { m: a - b, e }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
            e: self.e + other.e,
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            m: self.m.abs(),
            e: self.e,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    /// `self <= other`, exact.
    pub fn le(&self, other: &Self) -> bool {
        let (a, b, _) = self.aligned(other);
        a <= b
    }

    /// Exact equality.
    pub fn eq_exact(&self, other: &Self) -> bool {
        let (a, b, _) = self.aligned(other);
        a == b
    }

    /// Faithful f64 approximation, good enough for diagnostics.
    pub fn approx(&self) -> f64 {
        let bits = self.m.bits() as i64;
        if bits == 0 {
            return 0.0;
        }
        let shift = bits - 53;
        let (top, e) = if shift > 0 {
            ((&self.m >> shift as u32).iter_u64_digits().next().unwrap_or(0), self.e + shift)
        } else {
            (self.m.iter_u64_digits().next().unwrap_or(0), self.e)
        };
        let sign = if self.m.is_negative() { -1.0 } else { 1.0 };
        sign * top as f64 * 2f64.powi(e as i32)
    }
}

pub fn dyadic_of_expansion(e: &Expansion) -> Dyadic {
    e.components()
        .iter()
        .fold(Dyadic::zero(), |acc, &c| acc.add(&Dyadic::from_f64(c)))
}

/// `|err| <= bound * |reference|`, evaluated exactly; `bound` is a finite
/// non-negative f64.
pub fn within_relative(err: &Dyadic, reference: &Dyadic, bound: f64) -> bool {
    err.abs().le(&reference.abs().mul(&Dyadic::from_f64(bound)))
}
