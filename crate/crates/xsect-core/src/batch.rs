//! Batched intersection evaluation over lane arrays.
//!
//! The kernel is written once over a [`Real`] abstraction and instantiated
//! for scalar `f64` and for fixed-width lane arrays. Every operation is
//! elementwise with the exact same rounding sequence as the scalar path, so
//! results are bit-identical for any lane width and any thread count.

use rayon::prelude::*;

use crate::geom::{ArcLatQuery, GeomError, IntersectionSolution, Vec3};
use crate::intersect::{canonicalize, map_back};

/// Queries per parallel work item; output order is by index, so chunking
/// does not affect results.
const CHUNK: usize = 4096;

/// Elementwise arithmetic over one value or a lane array.
pub trait Real: Copy {
    fn splat(x: f64) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn mul_add(self, b: Self, c: Self) -> Self;
    fn sqrt(self) -> Self;
    fn max(self, o: Self) -> Self;
    /// Elementwise `if cond > 0 { a } else { b }`.
    fn select_gt_zero(cond: Self, a: Self, b: Self) -> Self;
}

impl Real for f64 {
    #[inline(always)]
    fn splat(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn add(self, o: Self) -> Self {
        self + o
    }
    #[inline(always)]
    fn sub(self, o: Self) -> Self {
        self - o
    }
    #[inline(always)]
    fn mul(self, o: Self) -> Self {
        self * o
    }
    #[inline(always)]
    fn div(self, o: Self) -> Self {
        self / o
    }
    #[inline(always)]
    fn neg(self) -> Self {
        -self
    }
    #[inline(always)]
    fn mul_add(self, b: Self, c: Self) -> Self {
        f64::mul_add(self, b, c)
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline(always)]
    fn max(self, o: Self) -> Self {
        f64::max(self, o)
    }
    #[inline(always)]
    fn select_gt_zero(cond: Self, a: Self, b: Self) -> Self {
        if cond > 0.0 {
            a
        } else {
            b
        }
    }
}

/// Fixed-width lane array; all operations elementwise.
#[derive(Clone, Copy, Debug)]
pub struct Lanes<const N: usize>(pub [f64; N]);

macro_rules! lanewise {
    ($self:ident, $o:ident, $op:expr) => {{
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = $op($self.0[i], $o.0[i]);
        }
        Lanes(out)
    }};
}

impl<const N: usize> Real for Lanes<N> {
    #[inline(always)]
    fn splat(x: f64) -> Self {
        Lanes([x; N])
    }
    #[inline(always)]
    fn add(self, o: Self) -> Self {
        lanewise!(self, o, |a, b| a + b)
    }
    #[inline(always)]
    fn sub(self, o: Self) -> Self {
        lanewise!(self, o, |a, b| a - b)
    }
    #[inline(always)]
    fn mul(self, o: Self) -> Self {
        lanewise!(self, o, |a: f64, b| a * b)
    }
    #[inline(always)]
    fn div(self, o: Self) -> Self {
        lanewise!(self, o, |a, b| a / b)
    }
    #[inline(always)]
    fn neg(self) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = -self.0[i];
        }
        Lanes(out)
    }
    #[inline(always)]
    fn mul_add(self, b: Self, c: Self) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.0[i].mul_add(b.0[i], c.0[i]);
        }
        Lanes(out)
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.0[i].sqrt();
        }
        Lanes(out)
    }
    #[inline(always)]
    fn max(self, o: Self) -> Self {
        lanewise!(self, o, |a: f64, b| a.max(b))
    }
    #[inline(always)]
    fn select_gt_zero(cond: Self, a: Self, b: Self) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = if cond.0[i] > 0.0 { a.0[i] } else { b.0[i] };
        }
        Lanes(out)
    }
}

// ---- generic EFT building blocks (same sequences as the scalar module) ----

#[inline(always)]
fn two_sum_g<R: Real>(a: R, b: R) -> (R, R) {
    let s = a.add(b);
    let v = s.sub(a);
    let e = a.sub(s.sub(v)).add(b.sub(v));
    (s, e)
}

#[inline(always)]
fn fast_two_sum_g<R: Real>(a: R, b: R) -> (R, R) {
    let s = a.add(b);
    let e = b.sub(s.sub(a));
    (s, e)
}

#[inline(always)]
fn two_prod_g<R: Real>(a: R, b: R) -> (R, R) {
    let p = a.mul(b);
    let e = a.mul_add(b, p.neg());
    (p, e)
}

#[inline(always)]
fn accu_dop_g<R: Real>(a: R, b: R, c: R, d: R) -> (R, R) {
    let (p1, r1) = two_prod_g(a, d);
    let (p2, r2) = two_prod_g(b, c);
    let (s, e) = two_sum_g(p1, p2.neg());
    (s, e.add(r1.sub(r2)))
}

#[inline(always)]
fn sum_non_neg_g<R: Real>(a: (R, R), b: (R, R)) -> (R, R) {
    let (hh, hl) = two_sum_g(a.0, b.0);
    let c = a.1.add(b.1);
    fast_two_sum_g(hh, hl.add(c))
}

#[inline(always)]
fn comp_dot_c_g<R: Real, const N: usize>(x: [R; N], y: [R; N]) -> (R, R) {
    let (mut p, mut s) = two_prod_g(x[0], y[0]);
    for i in 1..N {
        let (h, r) = two_prod_g(x[i], y[i]);
        let (t, q) = two_sum_g(p, h);
        p = t;
        s = s.add(q.add(r));
    }
    (p, s)
}

#[inline(always)]
fn sum_of_squares_c_g<R: Real, const N: usize>(x: [R; N], e: [R; N]) -> (R, R) {
    let zero = R::splat(0.0);
    let mut acc = (zero, zero);
    for i in 0..N {
        acc = sum_non_neg_g(acc, two_prod_g(x[i], x[i]));
    }
    let r_star = {
        let (p, s) = comp_dot_c_g(x, e);
        p.add(s)
    };
    let r = R::splat(2.0).mul_add(r_star, acc.1);
    fast_two_sum_g(acc.0, r)
}

/// Branch-free square root of a pair; zero (or negative) leading part yields
/// the zero pair.
#[inline(always)]
fn acc_sqrt_g<R: Real>(h_hi: R, h_lo: R) -> (R, R) {
    let zero = R::splat(0.0);
    let h = h_hi.max(zero);
    let s = h.sqrt();
    let r = s.neg().mul_add(s, h);
    let lo = r.add(h_lo).div(R::splat(2.0).mul(s));
    (
        s,
        R::select_gt_zero(h, lo, zero),
    )
}

/// Raw kernel outputs for one lane: classification inputs plus both points'
/// horizontal coordinates.
#[derive(Clone, Copy, Debug)]
pub struct KernelOut<R> {
    pub s_sq_hi: R,
    pub s_sq_lo: R,
    pub den: R,
    pub p1x: R,
    pub p1y: R,
    pub p2x: R,
    pub p2y: R,
}

/// The full accurate-intersection kernel on canonical-frame inputs, no
/// branches on data. Lanes with no intersection or a degenerate input
/// produce meaningless point coordinates; the caller filters them using
/// `s_sq_*` and `den`.
#[inline(always)]
pub fn accux_kernel<R: Real>(
    x1: [R; 3],
    x2: [R; 3],
    z0: R,
) -> KernelOut<R> {
    let nx = accu_dop_g(x1[1], x1[2], x2[1], x2[2]);
    let ny = accu_dop_g(x1[2], x1[0], x2[2], x2[0]);
    let nz = accu_dop_g(x1[0], x1[1], x2[0], x2[1]);
    let nxy_sq = sum_of_squares_c_g([nx.0, ny.0], [nx.1, ny.1]);
    let n_sq = sum_of_squares_c_g([nx.0, ny.0, nz.0], [nx.1, ny.1, nz.1]);
    let z0_sq = two_prod_g(z0, z0);
    let d = comp_dot_c_g(
        [n_sq.0, n_sq.0, n_sq.1, n_sq.1],
        [z0_sq.0, z0_sq.1, z0_sq.0, z0_sq.1],
    );
    let (e_hi, e_lo) = two_sum_g(nxy_sq.0, d.0.neg());
    let e = nxy_sq.1.sub(d.1).add(e_lo);
    let s_sq = fast_two_sum_g(e_hi, e);
    let s = acc_sqrt_g(s_sq.0, s_sq.1);

    let fx = two_prod_g(nx.0, nz.0);
    let efx = fx.1.add(nx.0.mul(nz.1)).add(nz.0.mul(nx.1));
    let fy = two_prod_g(ny.0, nz.0);
    let efy = fy.1.add(ny.0.mul(nz.1)).add(nz.0.mul(ny.1));
    let den = nxy_sq.0;

    let num = |f: (R, R), ef: R, ox_hi: R, ox_lo: R| {
        let (p, sl) = comp_dot_c_g(
            [f.0, ef, ox_hi, ox_lo, ox_hi, ox_lo],
            [z0, z0, s.0, s.0, s.1, s.1],
        );
        p.add(sl)
    };
    let p1x = num(fx, efx, ny.0, ny.1).neg().div(den);
    let p1y = num(fy, efy, nx.0.neg(), nx.1.neg()).neg().div(den);
    let p2x = num(fx, efx, ny.0.neg(), ny.1.neg()).neg().div(den);
    let p2y = num(fy, efy, nx.0, nx.1).neg().div(den);
    KernelOut {
        s_sq_hi: s_sq.0,
        s_sq_lo: s_sq.1,
        den,
        p1x,
        p1y,
        p2x,
        p2y,
    }
}

fn finish(
    out_hi: f64,
    out_lo: f64,
    den: f64,
    p1x: f64,
    p1y: f64,
    p2x: f64,
    p2y: f64,
    z0: f64,
) -> Result<IntersectionSolution, GeomError> {
    if den == 0.0 {
        return Err(GeomError::DegenerateEquatorial);
    }
    let sign = if out_hi > 0.0 {
        1
    } else if out_hi < 0.0 {
        -1
    } else if out_lo > 0.0 {
        1
    } else if out_lo < 0.0 {
        -1
    } else {
        0
    };
    Ok(match sign {
        s if s < 0 => IntersectionSolution::NONE,
        0 => IntersectionSolution::tangent(Vec3::new(p1x, p1y, z0)),
        _ => IntersectionSolution::two(Vec3::new(p1x, p1y, z0), Vec3::new(p2x, p2y, z0)),
    })
}

fn batch_lanes<const N: usize>(
    queries: &[ArcLatQuery],
) -> Vec<Result<IntersectionSolution, GeomError>> {
    let mut results = Vec::with_capacity(queries.len());
    // canonical frame per query; failures short-circuit their own slot only
    let canon: Vec<_> = queries.iter().map(canonicalize).collect();
    let mut i = 0;
    while i < queries.len() {
        let width = N.min(queries.len() - i);
        // pack, padding short tails with a benign query
        let mut x1 = [[1.0; N], [0.0; N], [0.0; N]];
        let mut x2 = [[0.0; N], [1.0; N], [0.0; N]];
        let mut z0 = [0.5; N];
        for l in 0..width {
            if let Ok((q, _)) = &canon[i + l] {
                x1[0][l] = q.x1.x;
                x1[1][l] = q.x1.y;
                x1[2][l] = q.x1.z;
                x2[0][l] = q.x2.x;
                x2[1][l] = q.x2.y;
                x2[2][l] = q.x2.z;
                z0[l] = q.z0;
            }
        }
        let out = accux_kernel(
            [Lanes(x1[0]), Lanes(x1[1]), Lanes(x1[2])],
            [Lanes(x2[0]), Lanes(x2[1]), Lanes(x2[2])],
            Lanes(z0),
        );
        for l in 0..width {
            let r = match &canon[i + l] {
                Err(e) => Err(*e),
                Ok((q, t)) => finish(
                    out.s_sq_hi.0[l],
                    out.s_sq_lo.0[l],
                    out.den.0[l],
                    out.p1x.0[l],
                    out.p1y.0[l],
                    out.p2x.0[l],
                    out.p2y.0[l],
                    q.z0,
                )
                .map(|sol| map_back(sol, *t)),
            };
            results.push(r);
        }
        i += width;
    }
    results
}

/// Runs the accurate intersection over a slice of queries with the given
/// lane width (1, 2, 4 or 8). Results are bit-identical across widths.
pub fn accux_batch(
    queries: &[ArcLatQuery],
    lanes: usize,
) -> Vec<Result<IntersectionSolution, GeomError>> {
    match lanes {
        1 => batch_lanes::<1>(queries),
        2 => batch_lanes::<2>(queries),
        4 => batch_lanes::<4>(queries),
        8 => batch_lanes::<8>(queries),
        _ => panic!("unsupported lane width {lanes} (expected 1, 2, 4 or 8)"),
    }
}

/// Parallel version: fixed-size chunks processed on the current rayon pool,
/// reassembled in input order. Bit-identical to the serial path for any
/// thread count.
pub fn accux_batch_parallel(
    queries: &[ArcLatQuery],
    lanes: usize,
) -> Vec<Result<IntersectionSolution, GeomError>> {
    queries
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| accux_batch(chunk, lanes))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersect::{solve, Method};

    fn queries() -> Vec<ArcLatQuery> {
        let mut v = Vec::new();
        for k in 0..40 {
            let a = 0.1 + 0.02 * k as f64;
            let x1 = Vec3::new(a.cos(), a.sin(), 0.3 * (1.0 + 0.01 * k as f64));
            let x2 = Vec3::new(-a.sin(), a.cos() * 0.7, 0.5);
            let z0 = -0.9 + 0.04 * k as f64;
            v.push(ArcLatQuery::new_unchecked(x1, x2, z0));
        }
        // a couple of degenerates
        let u = Vec3::new(1.0, 0.0, 0.0);
        v.push(ArcLatQuery::new_unchecked(u, u, 0.5));
        v.push(ArcLatQuery::new_unchecked(
            u,
            Vec3::new(0.0, 1.0, 0.0),
            0.25,
        ));
        v
    }

    #[test]
    fn lanes_match_scalar_solve() {
        let qs = queries();
        let batched = accux_batch(&qs, 4);
        for (q, b) in qs.iter().zip(&batched) {
            let s = solve(q, Method::Accux);
            assert_eq!(&s, b, "mismatch for {q:?}");
        }
    }

    #[test]
    fn all_widths_bit_identical() {
        let qs = queries();
        let base = accux_batch(&qs, 1);
        for lanes in [2usize, 4, 8] {
            assert_eq!(accux_batch(&qs, lanes), base, "lanes = {lanes}");
        }
        assert_eq!(accux_batch_parallel(&qs, 4), base);
    }
}
