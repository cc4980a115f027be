//! Seeded query generators and lossless dataset serialization.
//!
//! Two families: a latitude-banded primary set that sweeps the circle
//! latitude from near-equator to within 1e-3 degrees of the pole, and a
//! near-tangency set where the circle height is pushed within a chosen
//! decade of the arc's maximum latitude. Generation is deterministic per
//! `(seed, band)`: every band runs on its own ChaCha stream, so adding or
//! reordering bands does not reshuffle the others.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{ArcLatQuery, Classification, Vec3};
use crate::hexfloat::{format_hex, parse_hex, HexFloatError};
use crate::intersect::classify;
use crate::oracle::{classify_reference, Expansion};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("record {line}: {source}")]
    BadFloat {
        line: usize,
        source: HexFloatError,
    },
    #[error("record {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// One latitude band, in degrees of |latitude| of the circle; half-open
/// `(lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub name: String,
    pub lat_lo_deg: f64,
    pub lat_hi_deg: f64,
}

impl BandSpec {
    fn new(lo: f64, hi: f64) -> Self {
        Self {
            name: format!("lat({lo},{hi}]"),
            lat_lo_deg: lo,
            lat_hi_deg: hi,
        }
    }
}

/// The default 17-band latitude schedule: five decades hugging the equator,
/// eight 10-degree bands across the midlatitudes, and four bands closing in
/// on the pole.
pub fn default_band_schedule() -> Vec<BandSpec> {
    let mut edges = vec![0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0];
    for k in 0..8 {
        edges.push(1.0 + 10.0 * (k + 1) as f64);
    }
    edges.extend_from_slice(&[89.0, 89.9, 89.99, 89.999]);
    edges
        .windows(2)
        .map(|w| BandSpec::new(w[0], w[1]))
        .collect()
}

/// A generated query with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub id: u64,
    pub band: String,
    pub query: ArcLatQuery,
}

fn unit_from_angles(tilt: f64, lon: f64, alpha: f64) -> Vec3 {
    // point at arc parameter alpha on the great circle whose plane normal is
    // tilted `tilt` radians off the pole toward longitude `lon`; alpha = 0
    // is the circle's highest-latitude point
    let top = Vec3::new(
        -tilt.cos() * lon.cos(),
        -tilt.cos() * lon.sin(),
        tilt.sin(),
    );
    let east = Vec3::new(-lon.sin(), lon.cos(), 0.0);
    Vec3::new(
        alpha.cos() * top.x + alpha.sin() * east.x,
        alpha.cos() * top.y + alpha.sin() * east.y,
        alpha.cos() * top.z,
    )
}

/// Latitude-banded generator: for each band, `per_band` queries whose circle
/// latitude falls in the band and whose arc crosses the circle transversally
/// (classification is verified to be two-point). Hemisphere is randomized.
pub fn gen_primary(seed: u64, per_band: usize, bands: &[BandSpec]) -> Vec<QueryRecord> {
    let mut out = Vec::with_capacity(per_band * bands.len());
    let mut id = 0u64;
    for (bi, band) in bands.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(bi as u64);
        let mut produced = 0;
        let mut attempts = 0;
        while produced < per_band {
            attempts += 1;
            assert!(
                attempts < per_band * 100 + 1000,
                "band {} rejected too many candidates",
                band.name
            );
            // (lo, hi]: sample down from the top edge
            let lat = band.lat_hi_deg
                - rng.random_range(0.0..(band.lat_hi_deg - band.lat_lo_deg));
            let z0 = lat.to_radians().sin();
            // circle max latitude strictly above the target latitude
            let lat_max = lat + rng.random_range(0.2..0.95) * (90.0 - lat);
            let tilt = lat_max.to_radians();
            let lon = rng.random_range(0.0..std::f64::consts::TAU);
            // arc crossing at alpha*, endpoints straddling it
            let cos_a = (lat.to_radians().sin() / lat_max.to_radians().sin()).min(1.0);
            let a_star = cos_a.acos();
            let half1 = rng.random_range(0.001f64..0.2);
            let half2 = rng.random_range(0.001f64..0.2);
            let x1 = unit_from_angles(tilt, lon, a_star - half1);
            let x2 = unit_from_angles(tilt, lon, a_star + half2);
            let flip = rng.random::<bool>();
            let sgn = if flip { -1.0 } else { 1.0 };
            let q = ArcLatQuery::new_unchecked(
                Vec3::new(x1.x, x1.y, sgn * x1.z),
                Vec3::new(x2.x, x2.y, sgn * x2.z),
                sgn * z0,
            );
            if matches!(classify(&q), Ok(Classification::TwoPoints)) {
                out.push(QueryRecord {
                    id,
                    band: band.name.clone(),
                    query: q,
                });
                id += 1;
                produced += 1;
            }
        }
    }
    out
}

/// Near-tangency generator: for each decade `10^-15 .. 10^-3` (13 decades),
/// `per_decade` queries whose circle height sits `r` below the arc's exact
/// maximum height, `r` log-uniform within the decade. The maximum height is
/// computed from the rounded endpoints in exact arithmetic, so the resulting
/// `s^2` really is of order `r`.
pub fn gen_illcond(seed: u64, per_decade: usize) -> Vec<QueryRecord> {
    let mut out = Vec::with_capacity(per_decade * ILLCOND_DECADES.len());
    let mut id = 0u64;
    for (di, &dec) in ILLCOND_DECADES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1000 + di as u64);
        let band = format!("tangent-1e{dec}");
        let mut produced = 0;
        let mut attempts = 0;
        while produced < per_decade {
            attempts += 1;
            assert!(
                attempts < per_decade * 100 + 1000,
                "decade 1e{dec} rejected too many candidates"
            );
            let tilt = rng.random_range(10.0f64..80.0).to_radians();
            let lon = rng.random_range(0.0..std::f64::consts::TAU);
            // short arc straddling the top of the circle
            let half1 = rng.random_range(1e-6f64..1e-4);
            let half2 = rng.random_range(1e-6f64..1e-4);
            let x1 = unit_from_angles(tilt, lon, -half1);
            let x2 = unit_from_angles(tilt, lon, half2);
            // exact maximum height of the great circle through the rounded
            // endpoints: |n_xy| / |n|
            let q0 = ArcLatQuery::new_unchecked(x1, x2, 0.0);
            let Some(z_top) = exact_top_height(&q0) else {
                continue;
            };
            let r = 10f64.powf(rng.random_range(dec as f64..dec as f64 + 1.0));
            let z0 = z_top - r;
            if !(0.0..1.0).contains(&z0) {
                continue;
            }
            let q = ArcLatQuery::new_unchecked(x1, x2, z0);
            if matches!(classify_reference(&q), Ok(Classification::TwoPoints)) {
                out.push(QueryRecord {
                    id,
                    band: band.clone(),
                    query: q,
                });
                id += 1;
                produced += 1;
            }
        }
    }
    out
}

/// Decade exponents for the near-tangency family.
pub const ILLCOND_DECADES: [i32; 13] = [
    -15, -14, -13, -12, -11, -10, -9, -8, -7, -6, -5, -4, -3,
];

/// `|n_xy| / |n|` of the arc's great circle, correctly rounded; `None` for a
/// degenerate arc.
pub fn exact_top_height(q: &ArcLatQuery) -> Option<f64> {
    let det = |a: f64, b: f64, c: f64, d: f64| {
        Expansion::from_product(a, d).sub(&Expansion::from_product(b, c))
    };
    let nx = det(q.x1.y, q.x1.z, q.x2.y, q.x2.z);
    let ny = det(q.x1.z, q.x1.x, q.x2.z, q.x2.x);
    let nz = det(q.x1.x, q.x1.y, q.x2.x, q.x2.y);
    let nxy_sq = nx.mul(&nx).add(&ny.mul(&ny));
    if nxy_sq.is_zero() && nz.is_zero() {
        return None;
    }
    let n_sq = nxy_sq.add(&nz.mul(&nz));
    Some(nxy_sq.div(&n_sq, 212).sqrt(212).round_to_f64())
}

// ---- serialization ----

#[derive(serde::Serialize, serde::Deserialize)]
struct Wire {
    id: u64,
    band: String,
    x1: [String; 3],
    x2: [String; 3],
    z0: String,
}

/// Writes records as JSON lines with hex-float coordinates (bit-exact
/// round-trip).
pub fn write_records<W: Write>(mut w: W, records: &[QueryRecord]) -> io::Result<()> {
    for r in records {
        let wire = Wire {
            id: r.id,
            band: r.band.clone(),
            x1: r.query.x1.as_array().map(format_hex),
            x2: r.query.x2.as_array().map(format_hex),
            z0: format_hex(r.query.z0),
        };
        serde_json::to_writer(&mut w, &wire)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSON-lines records written by [`write_records`]. Blank lines are
/// skipped.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<QueryRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: Wire = serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let p = |s: &String| {
            parse_hex(s).map_err(|source| DatasetError::BadFloat { line: i + 1, source })
        };
        let v = |a: &[String; 3]| -> Result<Vec3, DatasetError> {
            Ok(Vec3::new(p(&a[0])?, p(&a[1])?, p(&a[2])?))
        };
        out.push(QueryRecord {
            id: wire.id,
            band: wire.band,
            query: ArcLatQuery::new_unchecked(v(&wire.x1)?, v(&wire.x2)?, p(&wire.z0)?),
        });
    }
    Ok(out)
}

/// Writes the plain 7-column format: `x1x x1y x1z x2x x2y x2z z0` per line,
/// hex floats, `#` comments allowed on read.
pub fn write_plain<W: Write>(mut w: W, records: &[QueryRecord]) -> io::Result<()> {
    for r in records {
        let q = &r.query;
        let cols: Vec<String> = q
            .x1
            .as_array()
            .into_iter()
            .chain(q.x2.as_array())
            .chain([q.z0])
            .map(format_hex)
            .collect();
        writeln!(w, "{}", cols.join(" "))?;
    }
    Ok(())
}

/// Reads the plain 7-column format; ids are line-ordinal, bands empty.
pub fn read_plain<R: BufRead>(r: R) -> Result<Vec<QueryRecord>, DatasetError> {
    let mut out = Vec::new();
    let mut id = 0u64;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        if cols.len() != 7 {
            return Err(DatasetError::Malformed {
                line: i + 1,
                msg: format!("expected 7 columns, got {}", cols.len()),
            });
        }
        let mut v = [0.0f64; 7];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = parse_hex(c).map_err(|source| DatasetError::BadFloat { line: i + 1, source })?;
        }
        out.push(QueryRecord {
            id,
            band: String::new(),
            query: ArcLatQuery::new_unchecked(
                Vec3::new(v[0], v[1], v[2]),
                Vec3::new(v[3], v[4], v[5]),
                v[6],
            ),
        });
        id += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let bands = default_band_schedule();
        assert_eq!(bands.len(), 17);
        assert_eq!(bands[0].lat_lo_deg, 0.0);
        assert_eq!(bands[0].lat_hi_deg, 1e-4);
        assert_eq!(bands.last().unwrap().lat_hi_deg, 89.999);
        for w in bands.windows(2) {
            assert_eq!(w[0].lat_hi_deg, w[1].lat_lo_deg);
        }
    }

    #[test]
    fn primary_deterministic_and_in_band() {
        let bands = default_band_schedule();
        let a = gen_primary(7, 5, &bands);
        let b = gen_primary(7, 5, &bands);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5 * bands.len());
        for r in &a {
            let band = bands.iter().find(|b| b.name == r.band).unwrap();
            let lat = r.query.z0.abs().asin().to_degrees();
            assert!(
                lat > band.lat_lo_deg * 0.999 && lat <= band.lat_hi_deg * 1.001,
                "band {} got lat {lat}",
                r.band
            );
            assert!(matches!(
                classify(&r.query),
                Ok(Classification::TwoPoints)
            ));
        }
    }

    #[test]
    fn primary_seed_sensitivity() {
        let bands = default_band_schedule();
        assert_ne!(gen_primary(1, 3, &bands), gen_primary(2, 3, &bands));
    }

    #[test]
    fn illcond_hits_requested_decade() {
        let recs = gen_illcond(11, 3);
        assert_eq!(recs.len(), 3 * ILLCOND_DECADES.len());
        for r in recs.iter().filter(|r| r.band == "tangent-1e-6") {
            let top = exact_top_height(&r.query).unwrap();
            let gap = top - r.query.z0;
            assert!(
                (0.99e-6..2e-5).contains(&gap),
                "gap {gap:e} outside decade"
            );
        }
        assert_eq!(gen_illcond(11, 3), gen_illcond(11, 3));
    }

    #[test]
    fn json_round_trip_bits() {
        let bands = default_band_schedule();
        let recs = gen_primary(3, 2, &bands[..4]);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(recs, back);
    }

    #[test]
    fn plain_round_trip_bits() {
        let recs = gen_illcond(5, 2);
        let mut buf = Vec::new();
        write_plain(&mut buf, &recs).unwrap();
        let back = read_plain(&buf[..]).unwrap();
        assert_eq!(recs.len(), back.len());
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.query, b.query);
        }
    }
}
