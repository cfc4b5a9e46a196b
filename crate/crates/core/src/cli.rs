//! Command-line front end. Every subcommand writes one JSON report of the
//! form `{"version", "command", "cases": [...], "pass"}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::{mc_speed, simulate, snapshots, write_jsonl, SimConfig};
use crate::error::Error;
use crate::identity::{check_theorem_stationary, finite_sweep};
use crate::kasteleyn::{
    admissible_depths, build_boxed_plane_partition, bulk_probe, corollary_abc_check,
    enumerate_covers, partition_function, recursion_identity, HoneycombSubgraph,
};
use crate::kernel::{eval_k, QuadConfig, SpaceTimePoint};
use crate::stationary::{
    asymmetric_speed, slope_to_omega, speed, weights_to_slope, Slope, Weights,
};

pub const REPORT_VERSION: &str = "1";

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GROWTHLAB_THREADS";

const EXIT_OK: i32 = 0;
const EXIT_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILED,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "growthlab",
    version,
    about = "Growth speed of interlacing particle systems and lozenge tilings"
)]
pub struct RunConfig {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the particle dynamics from the packed state.
    Simulate(SimulateArgs),
    /// Evaluate correlation kernel entries.
    Kernel(KernelArgs),
    /// Compare the current with the speed series in the finite system.
    VerifyFinite(VerifyFiniteArgs),
    /// Compare kernel, series and closed form for stationary measures.
    VerifyStationary(VerifyStationaryArgs),
    /// Dimer identities and probes on boxed plane partitions.
    Kasteleyn(KasteleynArgs),
    /// Growth speed of a slope.
    Speed(SpeedArgs),
}

#[derive(Debug, Clone, Copy, Args)]
struct QuadArgs {
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, default_value_t = 64)]
    min_nodes: usize,
    #[arg(long, default_value_t = 1 << 16)]
    max_nodes: usize,
    /// Radius of the contour around 0.
    #[arg(long, default_value_t = 0.4)]
    r0: f64,
    /// Radius of the contour around 1.
    #[arg(long, default_value_t = 0.4)]
    r1: f64,
}

impl QuadArgs {
    fn config(&self) -> CliResult<QuadConfig<f64>> {
        let q = QuadConfig {
            rel_tol: self.rel_tol,
            min_nodes: self.min_nodes,
            max_nodes: self.max_nodes,
            r0: self.r0,
            r1: self.r1,
        };
        q.validate().map_err(usage)?;
        Ok(q)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of levels.
    #[arg(long = "N", alias = "depth")]
    depth: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated increasing snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
    /// Write the snapshots as JSON lines to this file.
    #[arg(long, requires = "snapshots")]
    jsonl: Option<PathBuf>,
    /// Estimate the growth rate at site `x,n` at time `t`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rate_at: Vec<i64>,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct KernelArgs {
    #[arg(long)]
    x1: i64,
    #[arg(long)]
    n1: i64,
    #[arg(long, default_value_t = 0.0)]
    t1: f64,
    #[arg(long)]
    x2: i64,
    #[arg(long)]
    n2: i64,
    /// Defaults to `t1`.
    #[arg(long)]
    t2: Option<f64>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct VerifyFiniteArgs {
    /// Positions, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    x: Vec<i64>,
    /// Levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<i64>,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct VerifyStationaryArgs {
    /// Slope `p_a,p_b,p_c` as decimals or fractions; repeatable.
    #[arg(long)]
    slope: Vec<String>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoxCheck {
    Recursion,
    Corollary,
    Macmahon,
    Bulk,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct KasteleynArgs {
    /// Box size.
    #[arg(long = "box")]
    size: i64,
    #[arg(long)]
    check: BoxCheck,
    /// Depth of the recursion; all admissible depths when omitted.
    #[arg(long = "N")]
    depth: Option<i64>,
    /// Base point `x,n`; every black vertex of the box when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base: Vec<i64>,
    /// Seed of the random edge weights.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lozenge weights `a,b,c` for the corollary; drawn from the seed when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
}

#[derive(Debug, Args)]
struct SpeedArgs {
    /// Slope `p_a,p_b,p_c` as decimals or fractions.
    #[arg(long, conflicts_with = "weights", required_unless_present = "weights")]
    slope: Option<String>,
    /// Lozenge weights `a,b,c`.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Right jump rate.
    #[arg(long, requires = "q")]
    p: Option<f64>,
    /// Left jump rate.
    #[arg(long, requires = "p")]
    q: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Report {
    version: &'static str,
    command: &'static str,
    cases: Vec<Value>,
    pass: bool,
}

impl Report {
    fn new(command: &'static str, cases: Vec<Value>) -> Self {
        let pass = cases
            .iter()
            .all(|c| c.get("pass").and_then(Value::as_bool).unwrap_or(true));
        Self {
            version: REPORT_VERSION,
            command,
            cases,
            pass,
        }
    }
}

fn parse_number(s: &str) -> CliResult<f64> {
    let bad = || CliError::Usage(format!("cannot parse number {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            Ok(num / den)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

/// Parses `p_a,p_b,p_c`, checks that it sums to 1 within 1e-9 and
/// normalizes it.
fn parse_slope(s: &str) -> CliResult<Slope<f64>> {
    let parts = s
        .split(',')
        .map(parse_number)
        .collect::<CliResult<Vec<_>>>()?;
    let [a, b, c] = parts[..] else {
        return Err(CliError::Usage(format!(
            "slope needs three proportions, got {s:?}"
        )));
    };
    let sum = a + b + c;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!(
            "slope proportions sum to {sum}, expected 1"
        )));
    }
    Slope::new(a / sum, b / sum, c / sum).map_err(usage)
}

fn expect_len<V>(flag: &str, values: &[V], len: usize) -> CliResult<()> {
    if values.is_empty() || values.len() == len {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{flag} takes {len} comma-separated values, got {}",
            values.len()
        )))
    }
}

const DEFAULT_SLOPES: [&str; 5] = [
    "1/3,1/3,1/3",
    "1/2,1/4,1/4",
    "0.2,0.3,0.5",
    "0.3,0.5,0.2",
    "0.25,0.6,0.15",
];

fn run_simulate(args: &SimulateArgs) -> CliResult<Report> {
    let cfg = SimConfig::new(args.depth, args.t, args.seed, args.replicas.max(1)).map_err(usage)?;
    if args.snapshots.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(CliError::Usage("snapshot times must be increasing".into()));
    }
    let (pattern, log) = simulate(&cfg)?;
    let mut cases = vec![json!({
        "kind": "final",
        "t": args.t,
        "seed": args.seed,
        "events": log.len(),
        "blocked": log.iter().filter(|e| e.chain_length == 0).count(),
        "pattern": pattern,
    })];
    if !args.snapshots.is_empty() {
        let snaps = snapshots(&cfg, &args.snapshots)?;
        if let Some(path) = &args.jsonl {
            write_jsonl(
                std::io::BufWriter::new(std::fs::File::create(path)?),
                &snaps,
            )?;
        }
        for (t, p) in args.snapshots.iter().zip(&snaps) {
            cases.push(json!({ "kind": "snapshot", "t": t, "pattern": p }));
        }
    }
    expect_len("--rate-at", &args.rate_at, 2)?;
    if let [x, n] = args.rate_at[..] {
        let mc = mc_speed(x, n, args.t, &cfg)?;
        cases.push(json!({ "kind": "rate", "x": x, "n": n, "t": args.t, "estimate": mc }));
    }
    Ok(Report::new("simulate", cases))
}

fn run_kernel(args: &KernelArgs) -> CliResult<Report> {
    let q = args.quad.config()?;
    let p1 = SpaceTimePoint::new(args.x1, args.n1, args.t1);
    let p2 = SpaceTimePoint::new(args.x2, args.n2, args.t2.unwrap_or(args.t1));
    let k = eval_k(p1, p2, &q)?;
    Ok(Report::new(
        "kernel",
        vec![json!({
            "from": p1,
            "to": p2,
            "re": k.value.re,
            "im": k.value.im,
            "nodes_used": k.nodes_used,
        })],
    ))
}

fn run_verify_finite(args: &VerifyFiniteArgs) -> CliResult<Report> {
    let q = args.quad.config()?;
    if let Some(n) = args.n.iter().find(|&&n| n < 1) {
        return Err(CliError::Usage(format!("levels start at 1, got {n}")));
    }
    if let Some(t) = args.t.iter().find(|t| !(**t >= 0.0)) {
        return Err(CliError::Usage(format!("times must be >= 0, got {t}")));
    }
    let mut cells = Vec::new();
    for &x in &args.x {
        for &n in &args.n {
            for &t in &args.t {
                cells.push((x, n, t));
            }
        }
    }
    let cases = finite_sweep(&cells, &q)?
        .into_iter()
        .map(|c| {
            json!({
                "x": c.x, "n": c.n, "t": c.t,
                "lhs": c.j, "rhs": c.v,
                "difference": c.difference, "tolerance": c.tolerance,
                "pass": c.pass,
            })
        })
        .collect();
    Ok(Report::new("verify-finite", cases))
}

fn run_verify_stationary(args: &VerifyStationaryArgs) -> CliResult<Report> {
    let q = args.quad.config()?;
    let given: Vec<&str> = args.slope.iter().map(String::as_str).collect();
    let slopes = if given.is_empty() {
        DEFAULT_SLOPES.to_vec()
    } else {
        given
    };
    let mut cases = Vec::new();
    for s in slopes {
        let slope = parse_slope(s)?;
        if !slope.is_rough() {
            return Err(CliError::Usage(format!("slope {s} is frozen")));
        }
        let c = check_theorem_stationary(&slope, &q)?;
        cases.push(json!({
            "slope": c.slope,
            "lhs": c.kernel, "rhs": c.series, "closed_form": c.closed_form,
            "truncation_index": c.truncation_index,
            "difference": c.max_difference, "tolerance": c.tolerance,
            "pass": c.pass,
        }));
    }
    Ok(Report::new("verify-stationary", cases))
}

const IDENTITY_TOL: f64 = 1e-12;

fn run_kasteleyn(args: &KasteleynArgs) -> CliResult<Report> {
    if args.size < 1 {
        return Err(CliError::Usage(format!(
            "box size must be >= 1, got {}",
            args.size
        )));
    }
    expect_len("--base", &args.base, 2)?;
    expect_len("--weights", &args.weights, 3)?;
    let unit = build_boxed_plane_partition::<f64>(args.size).map_err(usage)?;
    let cases = match args.check {
        BoxCheck::Macmahon => {
            let exact = partition_function(
                &build_boxed_plane_partition::<BigRational>(args.size).map_err(usage)?,
            )?;
            let z = partition_function(&unit)?;
            let covers = if unit.blacks().len() <= crate::kasteleyn::ENUMERATION_LIMIT {
                Some(enumerate_covers(&unit)?.len())
            } else {
                None
            };
            let count = exact.to_integer().to_string();
            let pass = covers.is_none_or(|c| c.to_string() == count)
                && (z - exact_f64(&exact)).abs() <= 1e-9 * z;
            vec![
                json!({ "size": args.size, "determinant": z, "exact": count, "covers": covers, "pass": pass }),
            ]
        }
        BoxCheck::Bulk => {
            let probe = bulk_probe(args.size)?;
            let mut case = serde_json::to_value(probe).expect("plain data");
            case["pass"] = json!(probe.speed_distance < 0.05);
            vec![case]
        }
        BoxCheck::Recursion | BoxCheck::Corollary => identity_cases(args, &unit)?,
    };
    Ok(Report::new("kasteleyn", cases))
}

fn exact_f64(z: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(z).unwrap_or(f64::NAN)
}

fn identity_cases(args: &KasteleynArgs, unit: &HoneycombSubgraph<f64>) -> CliResult<Vec<Value>> {
    let bases: Vec<(i64, i64)> = match args.base[..] {
        [x, n] => vec![(x, n)],
        _ => unit.blacks().iter().map(|b| (b.x, b.n)).collect(),
    };
    let graph = match args.check {
        BoxCheck::Recursion => unit.randomized(args.seed),
        _ => {
            let (a, b, c) = match args.weights[..] {
                [a, b, c] => (a, b, c),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                    (
                        rng.random_range(0.5..2.0),
                        rng.random_range(0.5..2.0),
                        rng.random_range(0.5..2.0),
                    )
                }
            };
            if !(a > 0.0 && b > 0.0 && c > 0.0) {
                return Err(CliError::Usage("weights must be positive".into()));
            }
            unit.with_abc_weights(a, b, c)
        }
    };
    let mut cases = Vec::new();
    for (x, n) in bases {
        let depths = admissible_depths(unit, x, n);
        let chosen = match args.depth {
            Some(d) if depths.contains(&d) => vec![d],
            Some(d) if args.base.len() == 2 => {
                return Err(CliError::Usage(format!(
                    "depth {d} is not admissible at base ({x},{n})"
                )));
            }
            Some(_) => continue,
            None => depths,
        };
        for depth in chosen {
            let case = if args.check == BoxCheck::Recursion {
                let r = recursion_identity(&graph, x, n, depth)?;
                let rhs = r.terms.iter().sum::<f64>() + r.remainder;
                json!({
                    "x": x, "n": n, "N": depth, "seed": args.seed,
                    "lhs": r.lhs, "rhs": rhs, "terms": r.terms, "remainder": r.remainder,
                    "difference": r.residual, "pass": r.residual < IDENTITY_TOL,
                })
            } else {
                let r = corollary_abc_check(&graph, x, n, depth)?;
                let rhs = r.expectations.iter().sum::<f64>() + r.remainder;
                json!({
                    "x": x, "n": n, "N": depth,
                    "lhs": r.lhs, "rhs": rhs, "expectations": r.expectations, "remainder": r.remainder,
                    "difference": r.residual, "forced_gap": r.forced_gap,
                    "pass": r.residual < IDENTITY_TOL && r.forced_gap < IDENTITY_TOL,
                })
            };
            cases.push(case);
        }
    }
    if cases.is_empty() {
        return Err(CliError::Usage(
            "no admissible (base, N) pair in this box".into(),
        ));
    }
    Ok(cases)
}

fn run_speed(args: &SpeedArgs) -> CliResult<Report> {
    expect_len("--weights", &args.weights, 3)?;
    let slope = match (&args.slope, &args.weights[..]) {
        (Some(s), _) => parse_slope(s)?,
        (None, [a, b, c]) => weights_to_slope(&Weights::new(*a, *b, *c)).map_err(usage)?,
        _ => return Err(CliError::Usage("give --slope or --weights".into())),
    };
    let omega = slope_to_omega(&slope);
    let mut case = json!({
        "slope": slope,
        "omega": { "re": omega.value.re, "im": omega.value.im },
        "frozen": omega.frozen,
        "v": speed(&slope),
    });
    if let (Some(p), Some(q)) = (args.p, args.q) {
        case["v_asymmetric"] = json!(asymmetric_speed(&slope, p, q));
    }
    Ok(Report::new("speed", vec![case]))
}

fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match &cfg.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Kernel(a) => run_kernel(a),
        Command::VerifyFinite(a) => run_verify_finite(a),
        Command::VerifyStationary(a) => run_verify_stationary(a),
        Command::Kasteleyn(a) => run_kasteleyn(a),
        Command::Speed(a) => run_speed(a),
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

fn emit(cfg: &RunConfig, report: &Report, stdout: &mut dyn Write) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    match &cfg.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code: 0 if every check passed, 1 on a failed check or
/// computation error, 2 on invalid arguments.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| execute(&cfg)));
    let result = outcome.and_then(|report| emit(&cfg, &report, stdout).map(|_| report.pass));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
