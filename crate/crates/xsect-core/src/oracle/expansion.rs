//! Nonoverlapping floating-point expansions: exact multi-component
//! arithmetic used as the ground-truth referee.
//!
//! An expansion stores its components in increasing magnitude with disjoint
//! bit ranges; its value is the exact sum of the components. Addition,
//! scaling and multiplication are exact. Square root and division are
//! iteratively refined to a requested bit precision.

use crate::eft::{fast_two_sum, two_prod, two_sum};

/// Hard cap on the component count of a compressed public expansion.
pub const MAX_COMPONENTS: usize = 16;

/// Exact value represented as a sum of nonoverlapping binary64 components,
/// increasing in magnitude. The zero expansion has no components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expansion {
    comps: Vec<f64>,
}

impl Expansion {
    pub fn zero() -> Self {
        Self { comps: Vec::new() }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            Self::zero()
        } else {
            Self { comps: vec![x] }
        }
    }

    /// Exact product of two binary64 values.
    pub fn from_product(a: f64, b: f64) -> Self {
        let p = two_prod(a, b);
        Self::from_components(&[p.lo, p.hi])
    }

    /// Builds from raw components (any order, overlaps allowed); the result
    /// is compressed.
    pub fn from_components(comps: &[f64]) -> Self {
        let mut e = Self::zero();
        for &c in comps {
            assert!(c.is_finite());
            e = e.add_f64(c);
        }
        e
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Sign of the exact value: -1, 0, or 1 (the largest component decides).
    pub fn sign(&self) -> i8 {
        match self.comps.last() {
            None => 0,
            Some(&c) if c > 0.0 => 1,
            _ => -1,
        }
    }

    /// Faithful binary64 approximation (smallest-to-largest summation).
    pub fn approx(&self) -> f64 {
        self.comps.iter().sum()
    }

    pub fn neg(&self) -> Self {
        Self {
            comps: self.comps.iter().map(|c| -c).collect(),
        }
    }

    /// Exact sum with a single binary64 value.
    pub fn add_f64(&self, b: f64) -> Self {
        if b == 0.0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.comps.len() + 1);
        let mut q = b;
        for &c in &self.comps {
            let s = two_sum(q, c);
            if s.lo != 0.0 {
                out.push(s.lo);
            }
            q = s.hi;
        }
        if q != 0.0 || out.is_empty() {
            out.push(q);
        }
        let e = Self { comps: out }.compressed();
        e.check_capacity();
        e
    }

    /// Exact sum of two expansions.
    pub fn add(&self, other: &Self) -> Self {
        let mut acc = self.clone();
        for &c in &other.comps {
            acc = acc.raw_add_f64(c);
        }
        let e = acc.compressed();
        e.check_capacity();
        e
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact product with a single binary64 value (scale-expansion).
    pub fn scale(&self, b: f64) -> Self {
        let e = self.raw_scale(b).compressed();
        e.check_capacity();
        e
    }

    /// Exact product of two expansions.
    pub fn mul(&self, other: &Self) -> Self {
        let e = self.raw_mul(other).compressed();
        e.check_capacity();
        e
    }

    /// Correctly rounded binary64 value of the expansion.
    pub fn round_to_f64(&self) -> f64 {
        let mut cand = self.approx();
        // add the exact residual until the rounding is a fixed point
        for _ in 0..4 {
            let r = self.raw_add_f64(-cand).compressed();
            if r.is_zero() {
                break;
            }
            let next = cand + r.approx();
            if next == cand {
                break;
            }
            cand = next;
        }
        cand
    }

    /// Square root to at least `target_bits` of relative precision
    /// (Newton refinement with exact residuals). Negative input panics.
    pub fn sqrt(&self, target_bits: u32) -> Self {
        assert!(self.sign() >= 0, "expansion sqrt of negative value");
        if self.is_zero() {
            return Self::zero();
        }
        let mut s = Self::from_f64(self.approx().sqrt());
        let mut bits = 50u32;
        while bits < target_bits + 10 {
            // s += (a - s^2) / (2 s), correction evaluated in binary64
            let r = self.sub(&s.raw_mul(&s).compressed());
            if r.is_zero() {
                return s;
            }
            let c = r.approx() / (2.0 * s.approx());
            if c == 0.0 {
                break;
            }
            s = s.raw_add_f64(c).compressed();
            bits += 50;
        }
        s.check_capacity();
        s
    }

    /// Quotient `self / den` to at least `target_bits` of relative
    /// precision via iterated exact-residual correction.
    pub fn div(&self, den: &Self, target_bits: u32) -> Self {
        assert!(!den.is_zero(), "expansion division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let d_approx = den.approx();
        let mut q = Self::zero();
        let mut r = self.clone();
        let mut bits = 0u32;
        while bits < target_bits + 10 {
            let c = r.approx() / d_approx;
            if c == 0.0 {
                break;
            }
            q = q.raw_add_f64(c).compressed();
            r = r.sub(&den.raw_scale(c).compressed());
            if r.is_zero() {
                break;
            }
            bits += 50;
        }
        q.check_capacity();
        q
    }

    fn check_capacity(&self) {
        assert!(
            self.comps.len() <= MAX_COMPONENTS,
            "expansion capacity overflow: {} components",
            self.comps.len()
        );
    }

    // ---- raw (capacity-unchecked) kernels ----

    fn raw_add_f64(&self, b: f64) -> Self {
        if b == 0.0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.comps.len() + 1);
        let mut q = b;
        for &c in &self.comps {
            let s = two_sum(q, c);
            if s.lo != 0.0 {
                out.push(s.lo);
            }
            q = s.hi;
        }
        if q != 0.0 || out.is_empty() {
            out.push(q);
        }
        if out == [0.0] {
            return Self::zero();
        }
        Self { comps: out }
    }

    fn raw_scale(&self, b: f64) -> Self {
        if b == 0.0 || self.is_zero() {
            return Self::zero();
        }
        let mut out = Vec::with_capacity(2 * self.comps.len());
        let first = two_prod(self.comps[0], b);
        let mut q = first.hi;
        if first.lo != 0.0 {
            out.push(first.lo);
        }
        for &c in &self.comps[1..] {
            let t = two_prod(c, b);
            let s1 = two_sum(q, t.lo);
            if s1.lo != 0.0 {
                out.push(s1.lo);
            }
            let s2 = fast_two_sum(t.hi, s1.hi);
            if s2.lo != 0.0 {
                out.push(s2.lo);
            }
            q = s2.hi;
        }
        if q != 0.0 || out.is_empty() {
            out.push(q);
        }
        Self { comps: out }
    }

    fn raw_mul(&self, other: &Self) -> Self {
        let mut acc = Self::zero();
        for &b in &other.comps {
            let part = self.raw_scale(b).compressed();
            let mut merged = acc;
            for &c in &part.comps {
                merged = merged.raw_add_f64(c);
            }
            acc = merged.compressed();
        }
        acc
    }

    /// Shewchuk's compress: minimal nonoverlapping form, increasing order.
    fn compressed(&self) -> Self {
        let m = self.comps.len();
        if m <= 1 {
            return self.clone();
        }
        let mut g = vec![0.0; m];
        let mut bottom = m - 1;
        let mut q = self.comps[m - 1];
        for i in (0..m - 1).rev() {
            let s = fast_two_sum(q, self.comps[i]);
            if s.lo != 0.0 {
                g[bottom] = s.hi;
                bottom -= 1;
                q = s.lo;
            } else {
                q = s.hi;
            }
        }
        g[bottom] = q;
        let mut h = Vec::with_capacity(m - bottom);
        let mut q = g[bottom];
        for &gi in &g[bottom + 1..] {
            let s = fast_two_sum(gi, q);
            if s.lo != 0.0 {
                h.push(s.lo);
            }
            q = s.hi;
        }
        if q != 0.0 || h.is_empty() {
            h.push(q);
        }
        if h == [0.0] {
            return Self::zero();
        }
        Self { comps: h }
    }
}
