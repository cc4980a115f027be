//! Ground-truth intersection evaluation in exact expansion arithmetic.
//!
//! The prefix of the computation (cross product, squared norms, `s^2`) is
//! exact; the square root and the final division are refined to at least
//! [`DEFAULT_TARGET_BITS`] bits of relative precision, far below one ulp of
//! binary64. Classification uses the exact sign of `s^2`.

pub mod expansion;

pub use expansion::Expansion;

use crate::geom::{ArcLatQuery, Classification, GeomError, SignTransform, Vec3};
use crate::intersect::canonicalize;

/// Default relative precision of the inexact oracle steps (four binary64
/// words' worth of bits).
pub const DEFAULT_TARGET_BITS: u32 = 212;

/// One intersection point with high-precision horizontal coordinates.
#[derive(Debug, Clone)]
pub struct ReferencePoint {
    pub px: Expansion,
    pub py: Expansion,
    /// The z coordinate is the query's `z0`, exactly.
    pub z0: f64,
}

impl ReferencePoint {
    /// The point rounded to binary64 coordinates.
    pub fn rounded(&self) -> Vec3 {
        Vec3::new(self.px.round_to_f64(), self.py.round_to_f64(), self.z0)
    }
}

/// Classification plus reference points, ordered consistently with
/// [`crate::intersect::solve`].
#[derive(Debug, Clone)]
pub enum ReferenceOutcome {
    NoIntersection,
    Tangent(ReferencePoint),
    TwoPoints(ReferencePoint, ReferencePoint),
}

impl ReferenceOutcome {
    pub fn classification(&self) -> Classification {
        match self {
            ReferenceOutcome::NoIntersection => Classification::NoIntersection,
            ReferenceOutcome::Tangent(_) => Classification::Tangent,
            ReferenceOutcome::TwoPoints(..) => Classification::TwoPoints,
        }
    }

    pub fn points(&self) -> Vec<&ReferencePoint> {
        match self {
            ReferenceOutcome::NoIntersection => Vec::new(),
            ReferenceOutcome::Tangent(p) => vec![p],
            ReferenceOutcome::TwoPoints(a, b) => vec![a, b],
        }
    }
}

/// Exact cross product `x1 x x2` as expansions.
fn exact_cross(x1: Vec3, x2: Vec3) -> [Expansion; 3] {
    let det = |a: f64, b: f64, c: f64, d: f64| {
        Expansion::from_product(a, d).sub(&Expansion::from_product(b, c))
    };
    [
        det(x1.y, x1.z, x2.y, x2.z),
        det(x1.z, x1.x, x2.z, x2.x),
        det(x1.x, x1.y, x2.x, x2.y),
    ]
}

struct ExactCore {
    n: [Expansion; 3],
    nxy_sq: Expansion,
    s_sq: Expansion,
}

/// Exact `s^2 = |n_xy|^2 - |n|^2 z0^2` and friends.
fn exact_core(q: &ArcLatQuery) -> Result<ExactCore, GeomError> {
    let n = exact_cross(q.x1, q.x2);
    if n.iter().all(Expansion::is_zero) {
        return Err(GeomError::DegenerateArc);
    }
    let nxy_sq = n[0].mul(&n[0]).add(&n[1].mul(&n[1]));
    if nxy_sq.is_zero() {
        return Err(GeomError::DegenerateEquatorial);
    }
    let n_sq = nxy_sq.add(&n[2].mul(&n[2]));
    let z0_sq = Expansion::from_product(q.z0, q.z0);
    let s_sq = nxy_sq.sub(&n_sq.mul(&z0_sq));
    Ok(ExactCore { n, nxy_sq, s_sq })
}

/// Classification by the exact sign of `s^2`.
pub fn classify_reference(q: &ArcLatQuery) -> Result<Classification, GeomError> {
    let core = exact_core(q)?;
    Ok(match core.s_sq.sign() {
        s if s < 0 => Classification::NoIntersection,
        0 => Classification::Tangent,
        _ => Classification::TwoPoints,
    })
}

fn reference_from_core(
    core: &ExactCore,
    z0: f64,
    target_bits: u32,
) -> Result<ReferenceOutcome, GeomError> {
    if core.s_sq.sign() < 0 {
        return Ok(ReferenceOutcome::NoIntersection);
    }
    let s = core.s_sq.sqrt(target_bits);
    let [nx, ny, nz] = &core.n;
    let z0e = Expansion::from_f64(z0);
    let zxz = z0e.mul(nx).mul(nz);
    let zyz = z0e.mul(ny).mul(nz);
    let sny = s.mul(ny);
    let snx = s.mul(nx);
    let point = |numx: Expansion, numy: Expansion| ReferencePoint {
        px: numx.neg().div(&core.nxy_sq, target_bits),
        py: numy.neg().div(&core.nxy_sq, target_bits),
        z0,
    };
    let p1 = point(zxz.add(&sny), zyz.sub(&snx));
    Ok(if core.s_sq.sign() == 0 {
        ReferenceOutcome::Tangent(p1)
    } else {
        let p2 = point(zxz.sub(&sny), zyz.add(&snx));
        ReferenceOutcome::TwoPoints(p1, p2)
    })
}

fn map_back_reference(out: ReferenceOutcome, t: SignTransform) -> ReferenceOutcome {
    let map = |p: ReferencePoint| ReferencePoint {
        px: if t.reflect_x { p.px.neg() } else { p.px },
        py: if t.reflect_y { p.py.neg() } else { p.py },
        z0: if t.reflect_z { -p.z0 } else { p.z0 },
    };
    match out {
        ReferenceOutcome::NoIntersection => ReferenceOutcome::NoIntersection,
        ReferenceOutcome::Tangent(p) => ReferenceOutcome::Tangent(map(p)),
        ReferenceOutcome::TwoPoints(a, b) => {
            let (a, b) = if t.swaps_solutions() {
                (map(b), map(a))
            } else {
                (map(a), map(b))
            };
            ReferenceOutcome::TwoPoints(a, b)
        }
    }
}

/// Reference intersection with points ordered and framed to match
/// [`crate::intersect::solve`]: the query is canonicalized with the same
/// sign transform and the solutions are mapped back identically.
pub fn intersect_reference(
    q: &ArcLatQuery,
    target_bits: u32,
) -> Result<ReferenceOutcome, GeomError> {
    let (canon, t) = canonicalize(q)?;
    let core = exact_core(&canon)?;
    let out = reference_from_core(&core, canon.z0, target_bits)?;
    Ok(map_back_reference(out, t))
}

/// Same result through the unit-normal formulation (`n` normalized exactly
/// to `target_bits`, then `s^2 = |n_xy|^2 - z0^2`). Used to cross-check the
/// primary oracle path: both must agree to well below one binary64 ulp.
pub fn intersect_reference_unitized(
    q: &ArcLatQuery,
    target_bits: u32,
) -> Result<ReferenceOutcome, GeomError> {
    let (canon, t) = canonicalize(q)?;
    let core = exact_core(&canon)?;
    if core.s_sq.sign() < 0 {
        return Ok(map_back_reference(ReferenceOutcome::NoIntersection, t));
    }
    let n_sq = core.nxy_sq.add(&core.n[2].mul(&core.n[2]));
    let norm = n_sq.sqrt(target_bits + 60);
    let h: Vec<Expansion> = core
        .n
        .iter()
        .map(|c| c.div(&norm, target_bits + 60))
        .collect();
    let hxy_sq = h[0].mul(&h[0]).add(&h[1].mul(&h[1]));
    let z0e = Expansion::from_f64(canon.z0);
    let s_sq = hxy_sq.sub(&z0e.mul(&z0e));
    let s = if s_sq.sign() <= 0 {
        Expansion::zero()
    } else {
        s_sq.sqrt(target_bits + 60)
    };
    let zxz = z0e.mul(&h[0]).mul(&h[2]);
    let zyz = z0e.mul(&h[1]).mul(&h[2]);
    let sny = s.mul(&h[1]);
    let snx = s.mul(&h[0]);
    let point = |numx: Expansion, numy: Expansion| ReferencePoint {
        px: numx.neg().div(&hxy_sq, target_bits),
        py: numy.neg().div(&hxy_sq, target_bits),
        z0: canon.z0,
    };
    let p1 = point(zxz.add(&sny), zyz.sub(&snx));
    let out = if core.s_sq.sign() == 0 {
        ReferenceOutcome::Tangent(p1)
    } else {
        let p2 = point(zxz.sub(&sny), zyz.add(&snx));
        ReferenceOutcome::TwoPoints(p1, p2)
    };
    Ok(map_back_reference(out, t))
}

/// Relative Euclidean distance of a computed point from the reference point
/// (points lie on the unit sphere, so the denominator is essentially 1).
pub fn relative_point_error(p: Vec3, reference: &ReferencePoint) -> f64 {
    debug_assert_eq!(p.z, reference.z0);
    let dx = reference.px.sub(&Expansion::from_f64(p.x));
    let dy = reference.py.sub(&Expansion::from_f64(p.y));
    let num_sq = dx.mul(&dx).add(&dy.mul(&dy)).approx();
    let norm_sq = reference
        .px
        .mul(&reference.px)
        .add(&reference.py.mul(&reference.py))
        .add(&Expansion::from_product(reference.z0, reference.z0))
        .approx();
    (num_sq / norm_sq).sqrt()
}
