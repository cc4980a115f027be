//! Intersection of a great-circle arc with a constant-latitude circle.
//!
//! Three naive floating-point tiers plus the EFT-based `AccuX` evaluation of
//! the non-unit-normal formula
//!
//! ```text
//! P_x = -(z0*n_x*n_z + s*n_y) / |n_xy|^2
//! P_y = -(z0*n_y*n_z - s*n_x) / |n_xy|^2,   s = sqrt(|n_xy|^2 - |n|^2 z0^2)
//! ```
//!
//! with `n = x1 x x2`. All kernels run in a canonical frame where the normal
//! components and `z0` are non-negative; [`canonicalize`] maps a query into
//! that frame and the returned [`SignTransform`] maps points back.

use crate::eft::{
    acc_sqrt, accu_dop, comp_dot, comp_dot_c, fast_two_sum, kahan_dop, sum_of_squares_c, two_prod,
    two_sum, CompensatedPair, UNIT_ROUNDOFF,
};
use crate::geom::{
    ArcLatQuery, Classification, GeomError, IntersectionSolution, SignTransform, Vec3,
};

/// Cross product `x1 x x2` with per-component error compensation.
#[derive(Debug, Clone, Copy)]
pub struct NormalTriple {
    pub nx: CompensatedPair,
    pub ny: CompensatedPair,
    pub nz: CompensatedPair,
}

impl NormalTriple {
    pub fn is_zero(&self) -> bool {
        self.nx.sign() == 0 && self.ny.sign() == 0 && self.nz.sign() == 0
    }
}

/// Accurate cross product: each component via AccuDOP, relative error
/// `(1 + 2/|n_c|) u^2` plus higher-order terms for unit-ish inputs.
pub fn cross_accurate(x1: Vec3, x2: Vec3) -> NormalTriple {
    NormalTriple {
        nx: accu_dop(x1.y, x1.z, x2.y, x2.z),
        ny: accu_dop(x1.z, x1.x, x2.z, x2.x),
        nz: accu_dop(x1.x, x1.y, x2.x, x2.y),
    }
}

/// Chooses the sign-group element bringing the query into the canonical
/// frame (all normal components and `z0` non-negative) and applies it.
///
/// Component signs are decided from the AccuDOP pairs, which are faithful:
/// the sign of `hi` (or `lo` when `hi` is zero) matches the exact sign.
pub fn canonicalize(q: &ArcLatQuery) -> Result<(ArcLatQuery, SignTransform), GeomError> {
    let n = cross_accurate(q.x1, q.x2);
    if n.is_zero() {
        return Err(GeomError::DegenerateArc);
    }
    let reflect_z = q.z0 < 0.0;
    // z-reflection flips n_x and n_y
    let sx = if reflect_z { -n.nx.sign() } else { n.nx.sign() };
    let sy = if reflect_z { -n.ny.sign() } else { n.ny.sign() };
    let sz = n.nz.sign();
    let (fx, fy, fz) = (sx < 0, sy < 0, sz < 0);
    // remaining generators: endpoint swap flips (x,y,z), the x-reflection
    // flips (y,z), the y-reflection flips (x,z)
    let (swap_endpoints, reflect_x, reflect_y) = match (fx, fy, fz) {
        (false, false, false) => (false, false, false),
        (true, true, true) => (true, false, false),
        (false, true, true) => (false, true, false),
        (true, false, true) => (false, false, true),
        (true, true, false) => (false, true, true),
        (true, false, false) => (true, true, false),
        (false, true, false) => (true, false, true),
        (false, false, true) => (true, true, true),
    };
    let t = SignTransform {
        swap_endpoints,
        reflect_x,
        reflect_y,
        reflect_z,
    };
    Ok((t.apply_query(q), t))
}

/// Shared head of the AccuX pipeline: the compensated normal, squared norms,
/// and the compensated `s^2` value used for classification.
pub struct AccuxCore {
    pub n: NormalTriple,
    /// `|n_xy|^2` as a normalized pair `(S2, s2)`.
    pub nxy_sq: CompensatedPair,
    /// `|n|^2` as a normalized pair `(S3, s3)`.
    pub n_sq: CompensatedPair,
    /// `z0^2` exact pair.
    pub z0_sq: CompensatedPair,
    /// `|n|^2 * z0^2` pair.
    pub d: CompensatedPair,
    /// `s^2` as a normalized pair; its sign decides the classification.
    pub s_sq: CompensatedPair,
}

/// Runs AccuX lines 2-11 on a canonicalized query.
pub fn accux_prologue(q: &ArcLatQuery) -> AccuxCore {
    let n = cross_accurate(q.x1, q.x2);
    let nxy_sq = sum_of_squares_c(&[n.nx.hi, n.ny.hi], &[n.nx.lo, n.ny.lo]);
    let n_sq = sum_of_squares_c(&[n.nx.hi, n.ny.hi, n.nz.hi], &[n.nx.lo, n.ny.lo, n.nz.lo]);
    let z0_sq = two_prod(q.z0, q.z0);
    let d = comp_dot_c(
        &[n_sq.hi, n_sq.hi, n_sq.lo, n_sq.lo],
        &[z0_sq.hi, z0_sq.lo, z0_sq.hi, z0_sq.lo],
    );
    let e_pair = two_sum(nxy_sq.hi, -d.hi);
    let e = (nxy_sq.lo - d.lo) + e_pair.lo;
    let s_sq = fast_two_sum(e_pair.hi, e);
    AccuxCore {
        n,
        nxy_sq,
        n_sq,
        z0_sq,
        d,
        s_sq,
    }
}

/// Classifies a canonicalized query by the exact sign of the compensated
/// `s^2` value. Tangency is declared only for an exact zero.
pub fn classify(q: &ArcLatQuery) -> Result<Classification, GeomError> {
    let core = accux_prologue(q);
    if core.nxy_sq.hi == 0.0 {
        return Err(GeomError::DegenerateEquatorial);
    }
    Ok(match core.s_sq.sign() {
        s if s < 0 => Classification::NoIntersection,
        0 => Classification::Tangent,
        _ => Classification::TwoPoints,
    })
}

/// One AccuX numerator: `z0*(F + eF) + ny_sign*(ny + eny)*(s + es)` via
/// CompDot on six products, already rounded to working precision.
fn accux_numerator(
    f: CompensatedPair,
    ef: f64,
    other: CompensatedPair,
    s: CompensatedPair,
    z0: f64,
) -> f64 {
    comp_dot(
        &[f.hi, ef, other.hi, other.lo, other.hi, other.lo],
        &[z0, z0, s.hi, s.hi, s.lo, s.lo],
    )
}

/// `n_a * n_b` as leading part plus a single compensated error term
/// (AccuX lines 13-16 / 18-21).
fn accux_product(a: CompensatedPair, b: CompensatedPair) -> (CompensatedPair, f64) {
    let f = two_prod(a.hi, b.hi);
    let e2 = a.hi * b.lo;
    let e3 = b.hi * a.lo;
    let ef = (f.lo + e2) + e3;
    (f, ef)
}

/// Full intermediate record of one AccuX evaluation, for error
/// instrumentation.
pub struct AccuxTrace {
    pub core: AccuxCore,
    /// `s` as a pair from the accurate square root.
    pub s: CompensatedPair,
    /// Unrounded numerator pairs for the first point's x and y.
    pub num_x_pair: CompensatedPair,
    pub num_y_pair: CompensatedPair,
    /// Rounded numerators and denominator entering the final division.
    pub num_x: f64,
    pub num_y: f64,
    pub den: f64,
    pub solution: IntersectionSolution,
}

/// Executes AccuX (Algorithm steps 2-24) on a canonicalized query and
/// records every intermediate.
pub fn accux_trace(q: &ArcLatQuery) -> Result<AccuxTrace, GeomError> {
    let core = accux_prologue(q);
    if core.nxy_sq.hi == 0.0 {
        return Err(GeomError::DegenerateEquatorial);
    }
    let s_sq_sign = core.s_sq.sign();
    if s_sq_sign < 0 {
        return Ok(AccuxTrace {
            core,
            s: CompensatedPair::zero(),
            num_x_pair: CompensatedPair::zero(),
            num_y_pair: CompensatedPair::zero(),
            num_x: 0.0,
            num_y: 0.0,
            den: 0.0,
            solution: IntersectionSolution::NONE,
        });
    }
    let s = acc_sqrt(core.s_sq.hi.max(0.0), core.s_sq.lo);
    let n = &core.n;
    let (fx, efx) = accux_product(n.nx, n.nz);
    let (fy, efy) = accux_product(n.ny, n.nz);
    let den = core.nxy_sq.hi;

    let num_x_pair = comp_dot_c(
        &[fx.hi, efx, n.ny.hi, n.ny.lo, n.ny.hi, n.ny.lo],
        &[q.z0, q.z0, s.hi, s.hi, s.lo, s.lo],
    );
    let num_y_pair = comp_dot_c(
        &[fy.hi, efy, -n.nx.hi, -n.nx.lo, -n.nx.hi, -n.nx.lo],
        &[q.z0, q.z0, s.hi, s.hi, s.lo, s.lo],
    );
    let num_x = num_x_pair.value();
    let num_y = num_y_pair.value();
    let p1 = Vec3::new(-(num_x / den), -(num_y / den), q.z0);

    let solution = if s_sq_sign == 0 {
        IntersectionSolution::tangent(p1)
    } else {
        // second point: x <-> y interchange of the numerator roles
        let num_x2 = accux_numerator(fx, efx, n.ny.neg(), s, q.z0);
        let num_y2 = accux_numerator(fy, efy, n.nx, s, q.z0);
        let p2 = Vec3::new(-(num_x2 / den), -(num_y2 / den), q.z0);
        IntersectionSolution::two(p1, p2)
    };
    Ok(AccuxTrace {
        core,
        s,
        num_x_pair,
        num_y_pair,
        num_x,
        num_y,
        den,
        solution,
    })
}

/// AccuX on a canonicalized query. In regime (ii) the relative point error
/// is at most `3*sqrt(1 - z0^2)*u` plus higher-order terms.
pub fn accux(q: &ArcLatQuery) -> Result<IntersectionSolution, GeomError> {
    accux_trace(q).map(|t| t.solution)
}

/// Direct binary64 evaluation of the non-unit-normal formula; the normal is
/// computed with Kahan's compensated determinant.
pub fn intersect_naive_final(q: &ArcLatQuery) -> Result<IntersectionSolution, GeomError> {
    let nx = kahan_dop(q.x1.y, q.x1.z, q.x2.y, q.x2.z);
    let ny = kahan_dop(q.x1.z, q.x1.x, q.x2.z, q.x2.x);
    let nz = kahan_dop(q.x1.x, q.x1.y, q.x2.x, q.x2.y);
    let nxy_sq = nx * nx + ny * ny;
    let n_sq = nxy_sq + nz * nz;
    if nxy_sq == 0.0 {
        return if nx == 0.0 && ny == 0.0 && nz == 0.0 {
            Err(GeomError::DegenerateArc)
        } else {
            Err(GeomError::DegenerateEquatorial)
        };
    }
    let s_sq = nxy_sq - n_sq * (q.z0 * q.z0);
    Ok(naive_points(nx, ny, nz, nxy_sq, s_sq, q.z0))
}

/// Evaluation of the unit-normal formula (normalized `n`), as implemented in
/// existing geoscience couplers; accuracy/performance comparison tier.
pub fn intersect_naive_cdo(q: &ArcLatQuery) -> Result<IntersectionSolution, GeomError> {
    let nx = kahan_dop(q.x1.y, q.x1.z, q.x2.y, q.x2.z);
    let ny = kahan_dop(q.x1.z, q.x1.x, q.x2.z, q.x2.x);
    let nz = kahan_dop(q.x1.x, q.x1.y, q.x2.x, q.x2.y);
    let norm = (nx * nx + ny * ny + nz * nz).sqrt();
    if norm == 0.0 {
        return Err(GeomError::DegenerateArc);
    }
    let (hx, hy, hz) = (nx / norm, ny / norm, nz / norm);
    let nxy_sq = hx * hx + hy * hy;
    if nxy_sq == 0.0 {
        return Err(GeomError::DegenerateEquatorial);
    }
    let s_sq = nxy_sq - q.z0 * q.z0;
    Ok(naive_points(hx, hy, hz, nxy_sq, s_sq, q.z0))
}

/// The `1 - nz^2` denominator form; reproduces the catastrophic cancellation
/// of the baseline formula when `nz^2` approaches 1.
pub fn intersect_naive_baseline(q: &ArcLatQuery) -> Result<IntersectionSolution, GeomError> {
    let nx = kahan_dop(q.x1.y, q.x1.z, q.x2.y, q.x2.z);
    let ny = kahan_dop(q.x1.z, q.x1.x, q.x2.z, q.x2.x);
    let nz = kahan_dop(q.x1.x, q.x1.y, q.x2.x, q.x2.y);
    let norm = (nx * nx + ny * ny + nz * nz).sqrt();
    if norm == 0.0 {
        return Err(GeomError::DegenerateArc);
    }
    let (hx, hy, hz) = (nx / norm, ny / norm, nz / norm);
    let den = 1.0 - hz * hz;
    if den == 0.0 {
        return Err(GeomError::DegenerateEquatorial);
    }
    let s_sq = 1.0 - hz * hz - q.z0 * q.z0;
    Ok(naive_points(hx, hy, hz, den, s_sq, q.z0))
}

fn naive_points(
    nx: f64,
    ny: f64,
    nz: f64,
    den: f64,
    s_sq: f64,
    z0: f64,
) -> IntersectionSolution {
    if s_sq < 0.0 {
        return IntersectionSolution::NONE;
    }
    let s = s_sq.sqrt();
    let a = z0 * nx * nz;
    let b = z0 * ny * nz;
    let p1 = Vec3::new(-((a + s * ny) / den), -((b - s * nx) / den), z0);
    if s_sq == 0.0 {
        IntersectionSolution::tangent(p1)
    } else {
        let p2 = Vec3::new(-((a - s * ny) / den), -((b + s * nx) / den), z0);
        IntersectionSolution::two(p1, p2)
    }
}

/// Whether `p` (assumed on the arc's great circle) lies within the minor arc
/// between the endpoints, boundaries inclusive. Best-effort near endpoints.
pub fn point_on_arc(p: Vec3, x1: Vec3, x2: Vec3) -> bool {
    let n = [
        kahan_dop(x1.y, x1.z, x2.y, x2.z),
        kahan_dop(x1.z, x1.x, x2.z, x2.x),
        kahan_dop(x1.x, x1.y, x2.x, x2.y),
    ];
    let c1 = [
        kahan_dop(x1.y, x1.z, p.y, p.z),
        kahan_dop(x1.z, x1.x, p.z, p.x),
        kahan_dop(x1.x, x1.y, p.x, p.y),
    ];
    let c2 = [
        kahan_dop(p.y, p.z, x2.y, x2.z),
        kahan_dop(p.z, p.x, x2.z, x2.x),
        kahan_dop(p.x, p.y, x2.x, x2.y),
    ];
    comp_dot(&c1, &n) >= 0.0 && comp_dot(&c2, &n) >= 0.0
}

/// Combined error bound `(21/s + 19*sqrt(2)/|n_xy|) * u` for the direct
/// floating-point tier; `s == 0` yields an infinite sentinel.
///
/// `s` and `|n_xy|` are computed through the compensated pipeline, accurate
/// to `O(u^2)`.
pub fn naive_error_bound(q: &ArcLatQuery) -> f64 {
    let core = accux_prologue(q);
    let nxy = core.nxy_sq.value().max(0.0).sqrt();
    if core.s_sq.sign() <= 0 {
        return f64::INFINITY;
    }
    let s = acc_sqrt(core.s_sq.hi, core.s_sq.lo).value();
    if s == 0.0 || nxy == 0.0 {
        return f64::INFINITY;
    }
    (21.0 / s + 19.0 * std::f64::consts::SQRT_2 / nxy) * UNIT_ROUNDOFF
}

/// AccuX regime-(ii) error bound `3*sqrt(1 - z0^2)*u`.
pub fn accux_error_bound(z0: f64) -> f64 {
    3.0 * (1.0 - z0 * z0).max(0.0).sqrt() * UNIT_ROUNDOFF
}

/// Which intersection tier to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NaiveBaseline,
    NaiveCdo,
    NaiveFinal,
    Accux,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::NaiveBaseline,
        Method::NaiveCdo,
        Method::NaiveFinal,
        Method::Accux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NaiveBaseline => "naive-baseline",
            Method::NaiveCdo => "naive-cdo",
            Method::NaiveFinal => "naive-final",
            Method::Accux => "accux",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "naive-baseline" => Some(Method::NaiveBaseline),
            "naive-cdo" => Some(Method::NaiveCdo),
            "naive-final" => Some(Method::NaiveFinal),
            "accux" => Some(Method::Accux),
            _ => None,
        }
    }
}

/// Canonicalizes, runs the chosen tier, and maps the solution back to the
/// input frame. The first returned point is the `alpha* <= 0` solution with
/// respect to the input frame's orientation.
pub fn solve(q: &ArcLatQuery, method: Method) -> Result<IntersectionSolution, GeomError> {
    let (canon, t) = canonicalize(q)?;
    let sol = match method {
        Method::NaiveBaseline => intersect_naive_baseline(&canon)?,
        Method::NaiveCdo => intersect_naive_cdo(&canon)?,
        Method::NaiveFinal => intersect_naive_final(&canon)?,
        Method::Accux => accux(&canon)?,
    };
    Ok(map_back(sol, t))
}

/// Maps a canonical-frame solution into the original frame.
pub fn map_back(sol: IntersectionSolution, t: SignTransform) -> IntersectionSolution {
    let p1 = sol.p1.map(|p| t.apply_inverse(p));
    let p2 = sol.p2.map(|p| t.apply_inverse(p));
    let (p1, p2) = if t.swaps_solutions() && sol.classification == Classification::TwoPoints {
        (p2, p1)
    } else {
        (p1, p2)
    };
    IntersectionSolution {
        classification: sol.classification,
        p1,
        p2,
    }
}
