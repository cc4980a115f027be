//! Accurate intersections between great-circle arcs and constant-latitude
//! circles on the unit sphere, entirely in binary64.
//!
//! The headline entry point is [`intersect::solve`] with
//! [`intersect::Method::Accux`], whose intersection points carry a relative
//! error of about `3*sqrt(1 - z0^2) * 2^-53` even where plain floating-point
//! evaluations lose most of their digits (circles grazing the arc, circles
//! hugging the pole). Supporting modules:
//!
//! * [`eft`] — error-free transformations and compensated operators;
//! * [`geom`] — query/solution types and the sign canonicalization group;
//! * [`intersect`] — the accurate kernel and three plain tiers for
//!   comparison;
//! * [`batch`] — lane- and thread-parallel evaluation, bit-identical to the
//!   scalar path;
//! * [`oracle`] — exact expansion-arithmetic reference results;
//! * [`dataset`] — seeded benchmark-query generators and lossless
//!   serialization;
//! * [`hexfloat`] — `%a`-style bit-exact float formatting.

pub mod batch;
pub mod dataset;
pub mod eft;
pub mod geom;
pub mod hexfloat;
pub mod intersect;
pub mod oracle;

pub use geom::{ArcLatQuery, Classification, GeomError, IntersectionSolution, Vec3};
pub use intersect::{solve, Method};
