//! Input types for the intersection problem and the sign canonicalization
//! transform group.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GeomError {
    /// Arc endpoints are parallel: the cross product is exactly zero.
    #[error("degenerate arc: endpoints are parallel")]
    DegenerateArc,
    /// The arc lies in the equator plane; the intersection set with a
    /// latitude circle is empty or infinite.
    #[error("degenerate equatorial arc")]
    DegenerateEquatorial,
    /// Inputs outside the documented contract.
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// A direction in R^3, binary64 components.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// The problem input: great-circle arc endpoints and latitude plane height.
///
/// Endpoints must be approximately unit (norm in `[1/2, 2]` is accepted; the
/// intersection formula is invariant to the endpoint norms). `z0` must lie in
/// `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcLatQuery {
    pub x1: Vec3,
    pub x2: Vec3,
    pub z0: f64,
}

impl ArcLatQuery {
    pub fn new(x1: Vec3, x2: Vec3, z0: f64) -> Result<Self, GeomError> {
        if !x1.is_finite() || !x2.is_finite() || !z0.is_finite() {
            return Err(GeomError::InvalidInput("non-finite input"));
        }
        let n1 = x1.norm();
        let n2 = x2.norm();
        if !(0.5..=2.0).contains(&n1) || !(0.5..=2.0).contains(&n2) {
            return Err(GeomError::InvalidInput("endpoint norm outside [1/2, 2]"));
        }
        if !(-1.0..=1.0).contains(&z0) {
            return Err(GeomError::InvalidInput("z0 outside [-1, 1]"));
        }
        Ok(Self { x1, x2, z0 })
    }

    /// Constructs without validation; callers guarantee the contract.
    pub const fn new_unchecked(x1: Vec3, x2: Vec3, z0: f64) -> Self {
        Self { x1, x2, z0 }
    }
}

/// Records which elements of the sign group were applied to bring a query
/// into the canonical frame (`n_x, n_y, n_z >= 0`, `z0 >= 0`).
///
/// Each reflection negates one coordinate of both endpoints and is an
/// involution; the endpoint swap negates the normal without moving points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignTransform {
    pub swap_endpoints: bool,
    pub reflect_x: bool,
    pub reflect_y: bool,
    pub reflect_z: bool,
}

impl SignTransform {
    pub const IDENTITY: Self = Self {
        swap_endpoints: false,
        reflect_x: false,
        reflect_y: false,
        reflect_z: false,
    };

    /// Maps a point from the original frame into the canonical frame.
    /// Sign flips only; bit-exact.
    #[inline]
    pub fn apply_point(self, p: Vec3) -> Vec3 {
        Vec3::new(
            if self.reflect_x { -p.x } else { p.x },
            if self.reflect_y { -p.y } else { p.y },
            if self.reflect_z { -p.z } else { p.z },
        )
    }

    /// Maps a point computed in the canonical frame back to the original
    /// input frame. Reflections are involutions, so this equals
    /// [`Self::apply_point`].
    #[inline]
    pub fn apply_inverse(self, p: Vec3) -> Vec3 {
        self.apply_point(p)
    }

    /// Maps a whole query into the canonical frame.
    pub fn apply_query(self, q: &ArcLatQuery) -> ArcLatQuery {
        let a = self.apply_point(q.x1);
        let b = self.apply_point(q.x2);
        let (x1, x2) = if self.swap_endpoints { (b, a) } else { (a, b) };
        let z0 = if self.reflect_z { -q.z0 } else { q.z0 };
        ArcLatQuery { x1, x2, z0 }
    }

    /// True when the transform exchanges the roles of the two intersection
    /// points (the endpoint swap and the z-reflection each reverse the
    /// orientation of the intersection line).
    #[inline]
    pub fn swaps_solutions(self) -> bool {
        self.swap_endpoints ^ self.reflect_z
    }
}

/// How many latitude-circle intersections the arc's great circle has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    NoIntersection,
    Tangent,
    TwoPoints,
}

/// Result of an intersection computation. Every returned point has its
/// z-component bit-exactly equal to the query's `z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionSolution {
    pub classification: Classification,
    pub p1: Option<Vec3>,
    pub p2: Option<Vec3>,
}

impl IntersectionSolution {
    pub const NONE: Self = Self {
        classification: Classification::NoIntersection,
        p1: None,
        p2: None,
    };

    pub fn tangent(p: Vec3) -> Self {
        Self {
            classification: Classification::Tangent,
            p1: Some(p),
            p2: None,
        }
    }

    pub fn two(p1: Vec3, p2: Vec3) -> Self {
        Self {
            classification: Classification::TwoPoints,
            p1: Some(p1),
            p2: Some(p2),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.p1.into_iter().chain(self.p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_involution() {
        let p = Vec3::new(0.1, -0.2, 0.977);
        for bits in 0..16u8 {
            let t = SignTransform {
                swap_endpoints: bits & 1 != 0,
                reflect_x: bits & 2 != 0,
                reflect_y: bits & 4 != 0,
                reflect_z: bits & 8 != 0,
            };
            let back = t.apply_inverse(t.apply_point(p));
            assert_eq!(back, p);
        }
    }

    #[test]
    fn identity_keeps_point() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(SignTransform::IDENTITY.apply_inverse(p), p);
    }

    #[test]
    fn reflect_x_negates_x() {
        let t = SignTransform {
            reflect_x: true,
            ..SignTransform::IDENTITY
        };
        let p = t.apply_inverse(Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(p, Vec3::new(-1.0, 2.0, 3.0));
    }

    #[test]
    fn query_validation() {
        let u = Vec3::new(1.0, 0.0, 0.0);
        assert!(ArcLatQuery::new(u, Vec3::new(0.0, 0.0, 1.0), 0.5).is_ok());
        assert!(ArcLatQuery::new(Vec3::new(3.0, 0.0, 0.0), u, 0.5).is_err());
        assert!(ArcLatQuery::new(u, Vec3::new(0.0, 0.0, 1.0), 1.5).is_err());
        assert!(ArcLatQuery::new(u, Vec3::new(0.0, 0.0, f64::NAN), 0.5).is_err());
    }
}
