//! Acceptance gate: eleven numbered criteria with pinned tolerances.
//! Each test prints exactly one `criterion NN ... : pass` line on success;
//! a failure panics with the measured value.

mod common;

use std::time::Instant;

use common::{within_relative, Dyadic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xsect_core::batch::{accux_batch, accux_batch_parallel};
use xsect_core::dataset::{default_band_schedule, gen_illcond, gen_primary, QueryRecord};
use xsect_core::eft::{
    acc_sqrt, accu_dop, sum_of_squares_c, two_prod, two_sum, UNIT_ROUNDOFF,
};
use xsect_core::intersect::{
    accux_error_bound, accux_trace, canonicalize, naive_error_bound, solve, Method,
};
use xsect_core::oracle::{
    intersect_reference, relative_point_error, Expansion, ReferenceOutcome, DEFAULT_TARGET_BITS,
};
use xsect_core::{ArcLatQuery, Classification, Vec3};

const U: f64 = UNIT_ROUNDOFF;

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0xacce97);
    r.set_stream(stream);
    r
}

fn uniform_mag(r: &mut ChaCha8Rng) -> f64 {
    let m: f64 = r.random_range(-1.0..1.0);
    let e: i32 = r.random_range(-6..3);
    m * 2f64.powi(e)
}

/// Per-point relative errors of `method` against the reference; a
/// classification mismatch or a missing point counts as infinite error.
fn point_errors(q: &ArcLatQuery, method: Method) -> Vec<f64> {
    let reference = match intersect_reference(q, DEFAULT_TARGET_BITS) {
        Ok(r) => r,
        Err(_) => return vec![f64::INFINITY],
    };
    let pts = reference.points();
    let sol = match solve(q, method) {
        Ok(s) => s,
        Err(_) => return vec![f64::INFINITY; pts.len().max(1)],
    };
    let got: Vec<Vec3> = sol.points().collect();
    if got.len() != pts.len() {
        return vec![f64::INFINITY; pts.len().max(1)];
    }
    got.iter()
        .zip(&pts)
        .map(|(g, r)| {
            if g.z == r.z0 {
                relative_point_error(*g, r)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn primary_dataset() -> Vec<QueryRecord> {
    gen_primary(42, 600, &default_band_schedule())
}

#[test]
fn c01_eft_exactness_bulk() {
    let started = Instant::now();
    let mut r = rng(1);
    for _ in 0..1_000_000u32 {
        let a = uniform_mag(&mut r);
        let b = uniform_mag(&mut r);
        let s = two_sum(a, b);
        let p = two_prod(a, b);
        // exactness via integer arithmetic on the bit patterns
        let es = Dyadic::from_f64(a).add(&Dyadic::from_f64(b));
        let ps = Dyadic::from_f64(a).mul(&Dyadic::from_f64(b));
        assert!(
            Dyadic::from_f64(s.hi).add(&Dyadic::from_f64(s.lo)).eq_exact(&es),
            "criterion 01: two_sum({a:e}, {b:e}) not exact"
        );
        assert!(
            Dyadic::from_f64(p.hi).add(&Dyadic::from_f64(p.lo)).eq_exact(&ps),
            "criterion 01: two_prod({a:e}, {b:e}) not exact"
        );
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 30.0, "criterion 01: took {secs:.1}s (limit 30s)");
    println!("criterion 01 (1e6 exact transformations in {secs:.1}s): pass");
}

#[test]
fn c02_accudop_bound() {
    let mut r = rng(2);
    let factor = U * U * (1.0 + 64.0 * U);
    for _ in 0..100_000u32 {
        let (a, b, c, d) = (
            uniform_mag(&mut r),
            uniform_mag(&mut r),
            uniform_mag(&mut r),
            uniform_mag(&mut r),
        );
        let got = accu_dop(a, b, c, d);
        let ad = Dyadic::from_f64(a).mul(&Dyadic::from_f64(d));
        let bc = Dyadic::from_f64(b).mul(&Dyadic::from_f64(c));
        let exact = ad.sub(&bc);
        let err = Dyadic::from_f64(got.hi)
            .add(&Dyadic::from_f64(got.lo))
            .sub(&exact);
        // |err| <= (|ad-bc| + 2(|ad|+|bc|)) * u^2 (1+64u)
        let budget = exact
            .abs()
            .add(&ad.abs().mul(&Dyadic::from_f64(2.0)))
            .add(&bc.abs().mul(&Dyadic::from_f64(2.0)));
        assert!(
            within_relative(&err, &budget, factor),
            "criterion 02: accu_dop({a:e},{b:e},{c:e},{d:e}) err {:e}",
            err.approx()
        );
    }
    println!("criterion 02 (compensated determinant bound on 1e5 samples): pass");
}

#[test]
fn c03_sum_of_squares_bound() {
    let mut r = rng(3);
    for _ in 0..100_000u32 {
        let n = if r.random::<bool>() { 2 } else { 3 };
        let x: Vec<f64> = (0..n).map(|_| uniform_mag(&mut r)).collect();
        let e: Vec<f64> = x
            .iter()
            .map(|v| v * U * r.random_range(-1.0..1.0))
            .collect();
        let got = sum_of_squares_c(&x, &e);
        let mut exact = Dyadic::zero();
        for (&xi, &ei) in x.iter().zip(&e) {
            let s = Dyadic::from_f64(xi).add(&Dyadic::from_f64(ei));
            exact = exact.add(&s.mul(&s));
        }
        let err = Dyadic::from_f64(got.hi)
            .add(&Dyadic::from_f64(got.lo))
            .sub(&exact);
        let factor = if n == 2 { 3.0 } else { 6.0 };
        // published factor with 2x slack (the dropped e_i^2 terms add < u^2)
        assert!(
            within_relative(&err, &exact, 2.0 * (factor + 1.0) * U * U),
            "criterion 03: n={n} err {:e} vs {:e}",
            err.approx(),
            exact.approx()
        );
    }
    println!("criterion 03 (compensated sum-of-squares bounds, 1e5 samples): pass");
}

#[test]
fn c04_accurate_sqrt_bound() {
    let mut r = rng(4);
    let bound = (25.0 / 8.0) * U * U * (1.0 + 64.0 * U);
    for _ in 0..100_000u32 {
        let h = uniform_mag(&mut r).abs();
        if h == 0.0 {
            continue;
        }
        let lo = h * U * r.random_range(-1.0..1.0);
        let s = acc_sqrt(h, lo);
        let input = Dyadic::from_f64(h).add(&Dyadic::from_f64(lo));
        let pair = Dyadic::from_f64(s.hi).add(&Dyadic::from_f64(s.lo));
        let err = pair.mul(&pair).sub(&input);
        // value-space bound doubled when compared through the squares
        assert!(
            within_relative(&err, &input, 2.0 * bound + bound * bound),
            "criterion 04: acc_sqrt({h:e}, {lo:e}) err {:e}",
            err.approx()
        );
    }
    println!("criterion 04 (accurate square root bound, 1e5 samples): pass");
}

#[test]
fn c05_primary_accuracy_per_sample() {
    let records = primary_dataset();
    assert!(records.len() >= 10_000);
    let slack = 1.0 + 10.0 * U;
    let mut worst = 0.0f64;
    for rec in &records {
        let bound = accux_error_bound(rec.query.z0) * slack;
        for err in point_errors(&rec.query, Method::Accux) {
            assert!(
                err <= bound,
                "criterion 05: record {} error {err:e} > bound {bound:e}",
                rec.id
            );
            worst = worst.max(err / bound);
        }
    }
    println!(
        "criterion 05 (accurate tier within bound on {} queries, worst {:.2} of budget): pass",
        records.len(),
        worst
    );
}

#[test]
fn c06_near_tangency_split() {
    let records = gen_illcond(42, 60);
    let decade: Vec<&QueryRecord> = records
        .iter()
        .filter(|r| r.band == "tangent-1e-15")
        .collect();
    assert!(decade.len() >= 50);
    let mut naive: Vec<f64> = Vec::new();
    let mut accux_max = 0.0f64;
    for rec in &decade {
        naive.push(
            point_errors(&rec.query, Method::NaiveFinal)
                .into_iter()
                .fold(0.0, f64::max),
        );
        for e in point_errors(&rec.query, Method::Accux) {
            accux_max = accux_max.max(e);
        }
    }
    let naive_med = median(&mut naive);
    assert!(
        naive_med >= 1e-10,
        "criterion 06: naive median {naive_med:e} < 1e-10"
    );
    assert!(
        accux_max <= 1e-13,
        "criterion 06: accurate-tier max {accux_max:e} > 1e-13"
    );
    println!(
        "criterion 06 (1e-15 tangency gap: naive median {naive_med:.1e}, accurate max {accux_max:.1e}): pass"
    );
}

#[test]
fn c07_baseline_collapse_near_equator() {
    // near-equatorial great circles (apex latitude ~1 deg): the unit normal
    // is nearly polar, so the baseline's 1 - nz^2 denominator cancels while
    // the |n_xy|^2 form stays well conditioned
    let mut r = rng(7);
    let mut base: Vec<f64> = Vec::new();
    let mut fin: Vec<f64> = Vec::new();
    for _ in 0..300 {
        let tilt = r.random_range(0.5f64..2.0).to_radians();
        let lon = r.random_range(0.0..std::f64::consts::TAU);
        let lat = r.random_range(0.05..0.5) * tilt;
        let cos_a = (lat.sin() / tilt.sin()).min(1.0);
        let a_star = cos_a.acos();
        let point = |alpha: f64| {
            let top = Vec3::new(
                -tilt.cos() * lon.cos(),
                -tilt.cos() * lon.sin(),
                tilt.sin(),
            );
            Vec3::new(
                alpha.cos() * top.x - alpha.sin() * lon.sin(),
                alpha.cos() * top.y + alpha.sin() * lon.cos(),
                alpha.cos() * top.z,
            )
        };
        let q = ArcLatQuery::new_unchecked(
            point(a_star - r.random_range(0.01..0.3)),
            point(a_star + r.random_range(0.01..0.3)),
            lat.sin(),
        );
        base.push(
            point_errors(&q, Method::NaiveBaseline)
                .into_iter()
                .fold(0.0, f64::max),
        );
        fin.push(
            point_errors(&q, Method::NaiveFinal)
                .into_iter()
                .fold(0.0, f64::max),
        );
    }
    let (mb, mf) = (median(&mut base), median(&mut fin));
    assert!(
        mb >= 100.0 * mf,
        "criterion 07: baseline median {mb:e} not 100x worse than {mf:e}"
    );
    println!(
        "criterion 07 (baseline formula {:.0}x worse than direct tier near the equator): pass",
        mb / mf
    );
}

#[test]
fn c08_naive_bound_validity() {
    let records = primary_dataset();
    let mut covered = 0usize;
    let mut total = 0usize;
    for rec in &records {
        let bound = naive_error_bound(&rec.query);
        for err in point_errors(&rec.query, Method::NaiveFinal) {
            total += 1;
            if err <= bound {
                covered += 1;
            }
        }
    }
    let frac = covered as f64 / total as f64;
    assert!(
        frac >= 0.999,
        "criterion 08: bound covered only {frac:.5} of {total} points"
    );
    println!(
        "criterion 08 (a-priori naive bound covers {:.3}% of {total} points): pass",
        frac * 100.0
    );
}

#[test]
fn c09_throughput_ratios_informational() {
    let queries: Vec<ArcLatQuery> = gen_primary(9, 6_000, &default_band_schedule())
        .into_iter()
        .map(|r| r.query)
        .collect();
    let reps = (10_000_000 / queries.len()).max(1);
    let time_method = |m: Method| {
        let t = Instant::now();
        let mut sink = 0.0f64;
        for _ in 0..reps {
            for q in &queries {
                if let Ok(sol) = solve(std::hint::black_box(q), m) {
                    if let Some(p) = sol.p1 {
                        sink += p.x;
                    }
                }
            }
        }
        std::hint::black_box(sink);
        t.elapsed().as_secs_f64()
    };
    let t_final = time_method(Method::NaiveFinal);
    let t_accux = time_method(Method::Accux);
    let t = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(accux_batch(std::hint::black_box(&queries), 8));
    }
    let t_batch = t.elapsed().as_secs_f64();
    let n = (reps * queries.len()) as f64;
    assert!(t_final > 0.0 && t_accux.is_finite() && t_batch.is_finite());
    println!(
        "criterion 09 (informational, {:.1e} evaluations: accurate/direct time ratio {:.2}, \
         batch-8 {:.2}x the scalar accurate throughput): pass",
        n,
        t_accux / t_final,
        t_accux / t_batch
    );
}

#[test]
fn c10_lane_thread_determinism() {
    let queries: Vec<ArcLatQuery> = primary_dataset().into_iter().map(|r| r.query).collect();
    let checksum = |res: &[Result<xsect_core::IntersectionSolution, xsect_core::GeomError>]| {
        let mut acc = 0u64;
        for r in res {
            match r {
                Err(e) => {
                    let tag = match e {
                        xsect_core::GeomError::DegenerateArc => 1u64,
                        xsect_core::GeomError::DegenerateEquatorial => 2,
                        xsect_core::GeomError::InvalidInput(_) => 3,
                    };
                    acc = acc.wrapping_mul(31).wrapping_add(tag);
                }
                Ok(s) => {
                    acc = acc.wrapping_mul(31).wrapping_add(s.classification as u64);
                    for p in s.points() {
                        for c in p.as_array() {
                            acc = acc.wrapping_mul(1099511628211).wrapping_add(c.to_bits());
                        }
                    }
                }
            }
        }
        acc
    };
    let mut sums = Vec::new();
    for lanes in [1usize, 4] {
        for threads in [1usize, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let res = pool.install(|| accux_batch_parallel(&queries, lanes));
            sums.push((lanes, threads, checksum(&res)));
        }
    }
    let first = sums[0].2;
    for (lanes, threads, sum) in &sums {
        assert_eq!(
            *sum, first,
            "criterion 10: lanes={lanes} threads={threads} checksum diverged"
        );
    }
    println!(
        "criterion 10 (identical checksum {first:016x} across lanes x threads): pass"
    );
}

#[test]
fn c11_intermediate_error_profile() {
    let records = gen_primary(42, 120, &default_band_schedule());
    let mut s_errs = Vec::new();
    let mut num_errs = Vec::new();
    let mut final_errs = Vec::new();
    for rec in &records {
        let Ok((canon, _)) = canonicalize(&rec.query) else {
            continue;
        };
        let Ok(trace) = accux_trace(&canon) else {
            continue;
        };
        if trace.solution.classification != Classification::TwoPoints {
            continue;
        }
        // exact intermediates in the canonical frame
        let det = |a: f64, b: f64, c: f64, d: f64| {
            Expansion::from_product(a, d).sub(&Expansion::from_product(b, c))
        };
        let nx = det(canon.x1.y, canon.x1.z, canon.x2.y, canon.x2.z);
        let ny = det(canon.x1.z, canon.x1.x, canon.x2.z, canon.x2.x);
        let nz = det(canon.x1.x, canon.x1.y, canon.x2.x, canon.x2.y);
        let nxy_sq = nx.mul(&nx).add(&ny.mul(&ny));
        let n_sq = nxy_sq.add(&nz.mul(&nz));
        let z0e = Expansion::from_f64(canon.z0);
        let s_sq = nxy_sq.sub(&n_sq.mul(&z0e.mul(&z0e)));
        if s_sq.sign() <= 0 {
            continue;
        }
        let s_exact = s_sq.sqrt(DEFAULT_TARGET_BITS);
        let rel = |pair_hi: f64, pair_lo: f64, exact: &Expansion| {
            let pair = Expansion::from_f64(pair_hi).add_f64(pair_lo);
            (pair.sub(exact).approx() / exact.approx()).abs()
        };
        s_errs.push(rel(trace.s.hi, trace.s.lo, &s_exact));
        let numx = z0e.mul(&nx).mul(&nz).add(&s_exact.mul(&ny));
        let numy = z0e.mul(&ny).mul(&nz).sub(&s_exact.mul(&nx));
        num_errs.push(rel(trace.num_x_pair.hi, trace.num_x_pair.lo, &numx));
        num_errs.push(rel(trace.num_y_pair.hi, trace.num_y_pair.lo, &numy));
        // final rounded point error against the canonical-frame reference
        if let Ok(ReferenceOutcome::TwoPoints(r1, _)) =
            intersect_reference(&canon, DEFAULT_TARGET_BITS)
        {
            if let Some(p1) = trace.solution.p1 {
                final_errs.push(relative_point_error(p1, &r1));
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ms, mn, mf) = (mean(&s_errs), mean(&num_errs), mean(&final_errs));
    assert!(
        ms < U && mn < U,
        "criterion 11: pre-division means s={ms:e} num={mn:e} not below u"
    );
    assert!(
        (U / 4.0..=4.0 * U).contains(&mf),
        "criterion 11: final mean error {mf:e} outside [u/4, 4u]"
    );
    println!(
        "criterion 11 (mean rel. errors: s {:.2}u, numerators {:.2}u, final {:.2}u): pass",
        ms / U,
        mn / U,
        mf / U
    );
}
