//! `xsect`: dataset generation, accuracy studies, throughput measurement and
//! one-off intersections from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 degenerate geometry, 3 I/O error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xsect_core::batch::accux_batch_parallel;
use xsect_core::dataset::{
    self, default_band_schedule, gen_illcond, gen_primary, QueryRecord,
};
use xsect_core::geom::{ArcLatQuery, GeomError, Vec3};
use xsect_core::hexfloat::{format_hex, parse_hex};
use xsect_core::intersect::{
    accux_error_bound, accux_trace, canonicalize, naive_error_bound, solve, Method,
};
use xsect_core::oracle::{intersect_reference, relative_point_error};

#[derive(Parser)]
#[command(
    name = "xsect",
    about = "great-circle arc / latitude-circle intersection harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded query dataset.
    Gen(GenArgs),
    /// Measure per-method accuracy against the exact reference.
    Accuracy(AccuracyArgs),
    /// Measure throughput.
    Bench(BenchArgs),
    /// Intersect a single query.
    Intersect(IntersectArgs),
    /// Print every intermediate of the accurate kernel for one query.
    DumpIntermediates(QueryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Latitude-banded transversal crossings.
    Primary,
    /// Near-tangency queries, one band per gap decade.
    Illcond,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// JSON lines, hex-float coordinates.
    Jsonl,
    /// 7 hex-float columns per line.
    Plain,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Primary)]
    kind: Kind,
    /// Queries per latitude band (primary kind).
    #[arg(long, default_value_t = 1000)]
    per_band: usize,
    /// Queries per tangency-gap decade (illcond kind).
    #[arg(long, default_value_t = 1000)]
    per_decade: usize,
    /// Output path; `-` or absent means stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Args)]
struct AccuracyArgs {
    /// Read queries from a file instead of generating them.
    #[arg(long, conflicts_with_all = ["seed", "kind", "per_band", "per_decade"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Primary)]
    kind: Kind,
    #[arg(long, default_value_t = 200)]
    per_band: usize,
    #[arg(long, default_value_t = 200)]
    per_decade: usize,
    /// Comma-separated method list, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Reference precision in bits.
    #[arg(long, default_value_t = 212)]
    oracle: u32,
    /// CSV output path; `-` or absent means stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    per_band: usize,
    /// Comma-separated method list, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Lane width for the batched accurate tier (1, 2, 4 or 8).
    #[arg(long, default_value_t = 1)]
    lanes: usize,
    /// Worker threads; defaults to XSECT_THREADS or all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Total evaluations (the dataset is cycled as needed).
    #[arg(long, default_value_t = 2_000_000)]
    evals: usize,
    /// CSV output path; `-` or absent means stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// First endpoint, `x,y,z` (decimal or hex floats).
    #[arg(long)]
    x1: String,
    /// Second endpoint, `x,y,z`.
    #[arg(long)]
    x2: String,
    /// Latitude plane height.
    #[arg(long)]
    z0: String,
}

#[derive(Args)]
struct IntersectArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, default_value = "accux")]
    method: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are success, anything else is usage
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => run_gen(a),
        Cmd::Accuracy(a) => run_accuracy(a),
        Cmd::Bench(a) => run_bench(a),
        Cmd::Intersect(a) => run_intersect(a),
        Cmd::DumpIntermediates(a) => run_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xsect: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, msg: msg.into() }
    }
    fn degenerate(e: GeomError) -> Self {
        Self { code: 2, msg: e.to_string() }
    }
    fn io(e: impl std::fmt::Display) -> Self {
        Self { code: 3, msg: e.to_string() }
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(BufWriter::new(
            File::create(p).map_err(CliError::io)?,
        ))),
        _ => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn parse_methods(spec: &str) -> Result<Vec<Method>, CliError> {
    if spec == "all" {
        return Ok(Method::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| {
            Method::parse(s.trim())
                .ok_or_else(|| CliError::usage(format!("unknown method `{s}`")))
        })
        .collect()
}

fn parse_float(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    if t.starts_with("0x") || t.starts_with("-0x") || t.starts_with("+0x") {
        parse_hex(t).map_err(|e| CliError::usage(e.to_string()))
    } else {
        t.parse()
            .map_err(|_| CliError::usage(format!("bad float `{s}`")))
    }
}

fn parse_vec3(s: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("expected `x,y,z`, got `{s}`")));
    }
    Ok(Vec3::new(
        parse_float(parts[0])?,
        parse_float(parts[1])?,
        parse_float(parts[2])?,
    ))
}

fn parse_query(a: &QueryArgs) -> Result<ArcLatQuery, CliError> {
    ArcLatQuery::new(parse_vec3(&a.x1)?, parse_vec3(&a.x2)?, parse_float(&a.z0)?)
        .map_err(|e| CliError::usage(e.to_string()))
}

fn generate(kind: Kind, seed: u64, per_band: usize, per_decade: usize) -> Vec<QueryRecord> {
    match kind {
        Kind::Primary => gen_primary(seed, per_band, &default_band_schedule()),
        Kind::Illcond => gen_illcond(seed, per_decade),
    }
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("XSECT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run_gen(a: GenArgs) -> Result<(), CliError> {
    let records = generate(a.kind, a.seed, a.per_band, a.per_decade);
    let mut out = open_out(&a.out)?;
    match a.format {
        Format::Jsonl => dataset::write_records(&mut out, &records),
        Format::Plain => dataset::write_plain(&mut out, &records),
    }
    .map_err(CliError::io)?;
    out.flush().map_err(CliError::io)
}

fn read_input(path: &PathBuf) -> Result<Vec<QueryRecord>, CliError> {
    let f = File::open(path).map_err(CliError::io)?;
    let mut r = BufReader::new(f);
    let mut head = [0u8; 1];
    let n = r.read(&mut head).map_err(CliError::io)?;
    let f = File::open(path).map_err(CliError::io)?;
    let r2 = BufReader::new(f);
    if n == 1 && head[0] == b'{' {
        dataset::read_records(r2).map_err(CliError::io)
    } else {
        dataset::read_plain(r2).map_err(CliError::io)
    }
}

fn run_accuracy(a: AccuracyArgs) -> Result<(), CliError> {
    let methods = parse_methods(&a.methods)?;
    let records = match &a.input {
        Some(p) => read_input(p)?,
        None => generate(a.kind, a.seed, a.per_band, a.per_decade),
    };
    let mut out = open_out(&a.out)?;
    let emit = |out: &mut dyn Write, s: &str| out.write_all(s.as_bytes()).map_err(CliError::io);
    emit(&mut *out, "# per-band accuracy against the exact reference\n")?;
    emit(
        &mut *out,
        "# columns: band, method, points, median_rel_err, mean_rel_err, max_rel_err, \
         bound_exceedances, classification_mismatches\n",
    )?;
    emit(
        &mut *out,
        "band,method,points,median_rel_err,mean_rel_err,max_rel_err,\
         bound_exceedances,classification_mismatches\n",
    )?;
    let mut bands: Vec<String> = Vec::new();
    for r in &records {
        if !bands.contains(&r.band) {
            bands.push(r.band.clone());
        }
    }
    for band in &bands {
        let in_band: Vec<&QueryRecord> = records.iter().filter(|r| &r.band == band).collect();
        for &m in &methods {
            let mut errs: Vec<f64> = Vec::new();
            let mut exceed = 0usize;
            let mut mismatch = 0usize;
            for rec in &in_band {
                let q = &rec.query;
                let reference = match intersect_reference(q, a.oracle) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let pts = reference.points();
                let sol = solve(q, m);
                let bound = match m {
                    Method::Accux => accux_error_bound(q.z0),
                    Method::NaiveFinal => naive_error_bound(q),
                    _ => f64::INFINITY,
                };
                match sol {
                    Ok(s) if s.points().count() == pts.len() => {
                        for (g, r) in s.points().zip(&pts) {
                            let e = relative_point_error(g, r);
                            if e > bound {
                                exceed += 1;
                            }
                            errs.push(e);
                        }
                    }
                    _ => mismatch += pts.len().max(1),
                }
            }
            errs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let (med, mean, max) = if errs.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                (
                    errs[errs.len() / 2],
                    errs.iter().sum::<f64>() / errs.len() as f64,
                    *errs.last().unwrap(),
                )
            };
            emit(
                &mut *out,
                &format!(
                    "{band},{},{},{med:.3e},{mean:.3e},{max:.3e},{exceed},{mismatch}\n",
                    m.name(),
                    errs.len()
                ),
            )?;
        }
    }
    out.flush().map_err(CliError::io)
}

fn run_bench(a: BenchArgs) -> Result<(), CliError> {
    let methods = parse_methods(&a.methods)?;
    if ![1, 2, 4, 8].contains(&a.lanes) {
        return Err(CliError::usage("lanes must be 1, 2, 4 or 8"));
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count(a.threads) {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::usage(e.to_string()))?
    };
    let threads = pool.current_num_threads();
    let queries: Vec<ArcLatQuery> = generate(Kind::Primary, a.seed, a.per_band, 0)
        .into_iter()
        .map(|r| r.query)
        .collect();
    let reps = a.evals.div_ceil(queries.len()).max(1);
    let mut out = open_out(&a.out)?;
    out.write_all(
        b"# throughput; checksum folds every output bit, for determinism checks\n\
          # columns: method, lanes, threads, evaluations, seconds, ns_per_eval, checksum\n\
          method,lanes,threads,evaluations,seconds,ns_per_eval,checksum\n",
    )
    .map_err(CliError::io)?;
    for &m in &methods {
        let t = Instant::now();
        let mut checksum = 0u64;
        for _ in 0..reps {
            if m == Method::Accux && (a.lanes > 1 || threads > 1) {
                let res = pool.install(|| accux_batch_parallel(&queries, a.lanes));
                for r in &res {
                    if let Ok(s) = r {
                        for p in s.points() {
                            checksum = checksum
                                .wrapping_mul(1099511628211)
                                .wrapping_add(p.x.to_bits() ^ p.y.to_bits());
                        }
                    }
                }
            } else {
                for q in &queries {
                    if let Ok(s) = solve(std::hint::black_box(q), m) {
                        for p in s.points() {
                            checksum = checksum
                                .wrapping_mul(1099511628211)
                                .wrapping_add(p.x.to_bits() ^ p.y.to_bits());
                        }
                    }
                }
            }
        }
        let secs = t.elapsed().as_secs_f64();
        let evals = (reps * queries.len()) as f64;
        out.write_all(
            format!(
                "{},{},{},{},{:.3},{:.1},{:016x}\n",
                m.name(),
                if m == Method::Accux { a.lanes } else { 1 },
                if m == Method::Accux { threads } else { 1 },
                evals as u64,
                secs,
                secs / evals * 1e9,
                checksum
            )
            .as_bytes(),
        )
        .map_err(CliError::io)?;
    }
    out.flush().map_err(CliError::io)
}

fn run_intersect(a: IntersectArgs) -> Result<(), CliError> {
    let q = parse_query(&a.query)?;
    let m = Method::parse(&a.method)
        .ok_or_else(|| CliError::usage(format!("unknown method `{}`", a.method)))?;
    let sol = solve(&q, m).map_err(CliError::degenerate)?;
    println!("classification: {:?}", sol.classification);
    for (i, p) in sol.points().enumerate() {
        println!(
            "p{}: {:.17e} {:.17e} {:.17e}  ({} {} {})",
            i + 1,
            p.x,
            p.y,
            p.z,
            format_hex(p.x),
            format_hex(p.y),
            format_hex(p.z)
        );
    }
    Ok(())
}

fn run_dump(a: QueryArgs) -> Result<(), CliError> {
    let q = parse_query(&a)?;
    let (canon, t) = canonicalize(&q).map_err(CliError::degenerate)?;
    println!("transform: {t:?}");
    println!(
        "canonical: x1=({}, {}, {}) x2=({}, {}, {}) z0={}",
        format_hex(canon.x1.x),
        format_hex(canon.x1.y),
        format_hex(canon.x1.z),
        format_hex(canon.x2.x),
        format_hex(canon.x2.y),
        format_hex(canon.x2.z),
        format_hex(canon.z0)
    );
    let trace = accux_trace(&canon).map_err(CliError::degenerate)?;
    let pair = |name: &str, hi: f64, lo: f64| {
        println!("{name}: hi={} lo={}  (~{:.17e})", format_hex(hi), format_hex(lo), hi + lo);
    };
    let c = &trace.core;
    pair("n_x", c.n.nx.hi, c.n.nx.lo);
    pair("n_y", c.n.ny.hi, c.n.ny.lo);
    pair("n_z", c.n.nz.hi, c.n.nz.lo);
    pair("|n_xy|^2", c.nxy_sq.hi, c.nxy_sq.lo);
    pair("|n|^2", c.n_sq.hi, c.n_sq.lo);
    pair("z0^2", c.z0_sq.hi, c.z0_sq.lo);
    pair("|n|^2 z0^2", c.d.hi, c.d.lo);
    pair("s^2", c.s_sq.hi, c.s_sq.lo);
    pair("s", trace.s.hi, trace.s.lo);
    pair("num_x", trace.num_x_pair.hi, trace.num_x_pair.lo);
    pair("num_y", trace.num_y_pair.hi, trace.num_y_pair.lo);
    println!("den: {}  (~{:.17e})", format_hex(trace.den), trace.den);
    println!("classification: {:?}", trace.solution.classification);
    for (i, p) in trace.solution.points().enumerate() {
        println!(
            "canonical p{}: {} {} {}",
            i + 1,
            format_hex(p.x),
            format_hex(p.y),
            format_hex(p.z)
        );
    }
    Ok(())
}
