//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use growthlab::dynamics::{mc_speed, SimConfig};
use growthlab::identity::{
    check_theorem_finite, finite_sweep, recursion_step_with, v_series, v_series_stationary,
};
use growthlab::kasteleyn::{
    admissible_depths, build_boxed_plane_partition, bulk_probe, corollary_abc_check,
    enumerate_covers, enumeration_prob, kenyon_prob_with, partition_function, recursion_identity,
    restriction_prob, Edge, HoneycombSubgraph, InverseKasteleyn,
};
use growthlab::kernel::{eval_kinv_nu_single, nu_from_abc, EqualTimeKernel, QuadConfig};
use growthlab::stationary::{slope_to_weights, Slope};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn q() -> QuadConfig<f64> {
    QuadConfig::default()
}

fn closed_form_speed(pa: f64, pb: f64, pc: f64) -> f64 {
    use std::f64::consts::PI;
    (PI * pb).sin() * (PI * pc).sin() / (PI * (PI * pa).sin())
}

// Number of plane partitions in an n x n x n box.
fn macmahon(n: i64) -> BigRational {
    let mut p = BigRational::one();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                p *= BigRational::new(BigInt::from(i + j + k - 1), BigInt::from(i + j + k - 2));
            }
        }
    }
    p
}

fn finite_sweep_small() -> Check {
    let start = Instant::now();
    let mut cells = Vec::new();
    for x in -4..=2 {
        for n in 1..=5 {
            for t in [0.3, 1.0, 2.0] {
                cells.push((x, n, t));
            }
        }
    }
    let checks = finite_sweep(&cells, &q()).map_err(|e| e.to_string())?;
    let worst = checks.iter().map(|c| c.difference).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    ensure(
        worst < 1e-7 && elapsed < Duration::from_secs(60),
        format!(
            "{} cells, max |j - v| = {worst:.2e}, {:.1}s",
            cells.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn packed_start_rate() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let c = check_theorem_finite(-1, n, 0.0, &q()).map_err(|e| e.to_string())?;
        worst = worst
            .max((c.j - n as f64).abs())
            .max((c.v - n as f64).abs());
    }
    ensure(worst < 1e-9, format!("max deviation from n: {worst:.2e}"))
}

fn monte_carlo_speed() -> Check {
    let start = Instant::now();
    let exact = v_series(-1, 3, 0.5, &q()).map_err(|e| e.to_string())?.total;
    let cfg = SimConfig::new(3, 0.5, 20240611, 100_000).map_err(|e| e.to_string())?;
    let mc = mc_speed(-1, 3, 0.5, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let z = (mc.estimate - exact).abs() / mc.stderr;
    ensure(
        z < 4.0 && elapsed < Duration::from_secs(30),
        format!(
            "mc {:.5} +- {:.5}, series {exact:.5}, {z:.2} stderr, {:.1}s",
            mc.estimate,
            mc.stderr,
            elapsed.as_secs_f64()
        ),
    )
}

fn stationary_three_routes() -> Check {
    let slopes = [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        (0.5, 0.25, 0.25),
        (0.2, 0.3, 0.5),
        (0.3, 0.5, 0.2),
        (0.25, 0.6, 0.15),
    ];
    let mut worst: f64 = 0.0;
    let mut deepest = 0;
    for (pa, pb, pc) in slopes {
        let s = Slope::new(pa, pb, pc).map_err(|e| e.to_string())?;
        let kernel = -eval_kinv_nu_single(-1, 0, &s, &q()).map_err(|e| e.to_string())?;
        let series = v_series_stationary(&s, 1e-10, &q()).map_err(|e| e.to_string())?;
        let exact = closed_form_speed(pa, pb, pc);
        worst = worst
            .max((kernel - exact).abs())
            .max((series.total - exact).abs())
            .max((kernel - series.total).abs());
        deepest = deepest.max(series.truncation_index);
    }
    let sym = closed_form_speed(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
    let anchors = (sym - 3f64.sqrt() / (2.0 * std::f64::consts::PI)).abs() < 1e-15
        && (closed_form_speed(0.5, 0.25, 0.25) - 0.5 / std::f64::consts::PI).abs() < 1e-15;
    ensure(
        worst < 1e-6 && deepest < 40 && anchors,
        format!("max pairwise difference {worst:.2e}, tolerance reached by m = {deepest}"),
    )
}

fn macmahon_counts() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let expected = macmahon(n).to_f64().unwrap();
        let g = build_boxed_plane_partition::<f64>(n).map_err(|e| e.to_string())?;
        let z = partition_function(&g).map_err(|e| e.to_string())?;
        let exact = partition_function(
            &build_boxed_plane_partition::<BigRational>(n).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let covers = enumerate_covers(&g).map_err(|e| e.to_string())?.len() as f64;
        ok &= (z - expected).abs() <= 1e-9 * expected && exact == macmahon(n) && covers == expected;
        detail.push(format!(
            "n={n}: Z={z:.1} covers={covers} product={expected}"
        ));
    }
    ensure(ok, detail.join(", "))
}

// A random set of pairwise vertex-disjoint edges of `g`.
fn disjoint_edges(g: &HoneycombSubgraph<f64>, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut all: Vec<Edge> = g.edges().map(|(e, _)| *e).collect();
    all.shuffle(rng);
    let want = rng.random_range(1..=3);
    let mut chosen: Vec<Edge> = Vec::new();
    for e in all {
        if chosen.len() == want {
            break;
        }
        if chosen.iter().all(|c| c.b != e.b && c.w != e.w) {
            chosen.push(e);
        }
    }
    chosen
}

fn kenyon_three_way() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let size = 1 + trial % 2;
        let g = build_boxed_plane_partition::<f64>(size)
            .map_err(|e| e.to_string())?
            .randomized(1000 + trial as u64);
        let covers = enumerate_covers(&g).map_err(|e| e.to_string())?;
        let inv = InverseKasteleyn::new(&g).map_err(|e| e.to_string())?;
        let edges = disjoint_edges(&g, &mut rng);
        let k = kenyon_prob_with(&inv, &edges).map_err(|e| e.to_string())?;
        let r = restriction_prob(&g, &edges).map_err(|e| e.to_string())?;
        let f = enumeration_prob(&covers, &edges);
        worst = worst
            .max((k - r).abs())
            .max((k - f).abs())
            .max((r - f).abs());
    }
    ensure(
        worst < 1e-12,
        format!("50 edge sets, max disagreement {worst:.2e}"),
    )
}

fn recursion_on_boxes() -> Check {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for size in [2, 3] {
        let unit = build_boxed_plane_partition::<f64>(size).map_err(|e| e.to_string())?;
        for draw in 0..10u64 {
            let g = unit.randomized(77 + draw);
            let mut rng = ChaCha8Rng::seed_from_u64(500 + draw);
            let abc = unit.with_abc_weights(
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
            );
            for b in unit.blacks() {
                for depth in admissible_depths(&unit, b.x, b.n) {
                    let r = recursion_identity(&g, b.x, b.n, depth).map_err(|e| e.to_string())?;
                    let c =
                        corollary_abc_check(&abc, b.x, b.n, depth).map_err(|e| e.to_string())?;
                    worst = worst.max(r.residual).max(c.residual).max(c.forced_gap);
                    cases += 1;
                }
            }
        }
    }
    ensure(
        worst < 1e-12,
        format!("{cases} (base, N) cases, max residual {worst:.2e}"),
    )
}

fn single_vs_double() -> Check {
    let mut worst: f64 = 0.0;
    for (pa, pb, pc) in [(0.2, 0.3, 0.5), (0.45, 0.35, 0.2), (0.25, 0.15, 0.6)] {
        let s = Slope::new(pa, pb, pc).map_err(|e| e.to_string())?;
        let w = slope_to_weights(&s).map_err(|e| e.to_string())?;
        for dx in -3..=3 {
            for dn in -3..=3 {
                let single = eval_kinv_nu_single(dx, dn, &s, &q()).map_err(|e| e.to_string())?;
                let double = nu_from_abc(dx, dn, &w, &q()).map_err(|e| e.to_string())?;
                worst = worst.max((single - double).abs());
            }
        }
    }
    ensure(
        worst < 1e-6,
        format!("147 offsets, max difference {worst:.2e}"),
    )
}

fn bulk_convergence() -> Check {
    let mut distances = Vec::new();
    for n in [8, 12, 16, 20] {
        distances.push(bulk_probe(n).map_err(|e| e.to_string())?.speed_distance);
    }
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    ensure(
        distances[3] < 0.05 && monotone,
        format!("distances for n = 8, 12, 16, 20: {distances:.4?}"),
    )
}

fn algebraic_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let delta = |c: bool| if c { 1.0 } else { 0.0 };
    let mut kernels = [
        EqualTimeKernel::new(0.3, q()).map_err(|e| e.to_string())?,
        EqualTimeKernel::new(1.0, q()).map_err(|e| e.to_string())?,
    ];
    let (mut l1, mut l2, mut p3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let k = &mut kernels[rng.random_range(0..2)];
        let (x, xp) = (rng.random_range(-5..=5), rng.random_range(-5..=5));
        let (n, np) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let g =
            |k: &mut EqualTimeKernel<f64>, a, b, c, d| k.get(a, b, c, d).map_err(|e| e.to_string());
        let lhs = g(k, x, n, xp + 1, np - 1)?;
        let rhs = g(k, x, n, xp + 1, np)? - g(k, x, n, xp, np)? + delta(n == np - 1 && xp + 1 == x);
        l1 = l1.max((lhs - rhs).abs());
        let lhs = g(k, x, n - 1, xp, np)? - g(k, x + 1, n - 1, xp, np)?;
        let rhs = g(k, x, n, xp, np)? - delta(np == n && xp == x);
        l2 = l2.max((lhs - rhs).abs());
    }
    for _ in 0..100 {
        let k = &mut kernels[rng.random_range(0..2)];
        let (x, m) = (rng.random_range(-3..=1), rng.random_range(1..=4));
        let rows_excluded = [(x, m), (x + 1, m - 1), (x, m - 1)];
        let cols_excluded = [(x + 1, m), (x, m), (x + 1, m - 1)];
        let size = rng.random_range(0..=2);
        let mut couples = Vec::new();
        while couples.len() < size {
            let r = (rng.random_range(-4..=2), rng.random_range(1..=4));
            let c = (rng.random_range(-4..=2), rng.random_range(1..=4));
            let fresh = couples
                .iter()
                .all(|(a, b): &((i64, i64), (i64, i64))| *a != r && *b != c);
            if fresh && !rows_excluded.contains(&r) && !cols_excluded.contains(&c) {
                couples.push((r, c));
            }
        }
        let rc = recursion_step_with(k, &couples, x, m).map_err(|e| e.to_string())?;
        p3 = p3.max(rc.difference);
    }
    ensure(
        l1.max(l2).max(p3) < 1e-7,
        format!("max residuals: shift in level {l1:.2e}, shift in position {l2:.2e}, column step {p3:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "AC1 finite-time current equals speed on the desk sweep",
            finite_sweep_small,
        ),
        ("AC2 packed start grows at rate n", packed_start_rate),
        (
            "AC3 Monte Carlo speed matches the determinant series",
            monte_carlo_speed,
        ),
        (
            "AC4 stationary speed by kernel, series and closed form",
            stationary_three_routes,
        ),
        ("AC5 boxed plane partition counts", macmahon_counts),
        (
            "AC6 Kenyon, restriction and enumeration probabilities",
            kenyon_three_way,
        ),
        (
            "AC7 recursion identity and its (a,b,c) form",
            recursion_on_boxes,
        ),
        (
            "AC8 single and double integral stationary kernels",
            single_vs_double,
        ),
        (
            "AC9 bulk convergence of the box inverse Kasteleyn entry",
            bulk_convergence,
        ),
        (
            "AC10 kernel shift identities and column recursion",
            algebraic_identities,
        ),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
