use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use growthlab::identity::{
    check_theorem_finite, check_theorem_stationary, det, finite_sweep, j_current,
    recursion_step_check, recursion_step_with, stationary_expectation, telescoped_series, v_series,
    v_series_stationary, v_term, Couple,
};
use growthlab::kernel::{EqualTimeKernel, QuadConfig};
use growthlab::linalg::{ComplexMatrix, Matrix};
use growthlab::stationary::Slope;
use growthlab::QuadConfig64;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q() -> QuadConfig64 {
    QuadConfig::default()
}

fn closed_form(pa: f64, pb: f64, pc: f64) -> f64 {
    (PI * pb).sin() * (PI * pc).sin() / (PI * (PI * pa).sin())
}

// Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<Complex<f64>>]) -> Complex<f64> {
    if m.is_empty() {
        return Complex::new(1.0, 0.0);
    }
    let mut total = Complex::new(0.0, 0.0);
    for j in 0..m.len() {
        let minor: Vec<Vec<_>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][j] * sign * cofactor_det(&minor);
    }
    total
}

#[test]
fn determinant_matches_cofactors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 0..=6 {
        for _ in 0..5 {
            let rows: Vec<Vec<Complex<f64>>> = (0..d)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            let m: ComplexMatrix<f64> = Matrix::from_rows(rows.clone());
            assert!((det(&m) - cofactor_det(&rows)).norm() < 1e-12);
        }
    }
}

#[test]
fn packed_start_terms() {
    for n in 1..=6 {
        for l in 1..=n {
            assert_abs_diff_eq!(v_term(-1, n, 0.0, l, &q()).unwrap(), 1.0, epsilon = 1e-10);
        }
        let c = check_theorem_finite(-1, n, 0.0, &q()).unwrap();
        assert!((c.j - n as f64).abs() < 1e-10 && (c.v - n as f64).abs() < 1e-10);
    }
}

#[test]
fn known_speed_terms() {
    let s = v_series(-1, 3, 0.5, &q()).unwrap();
    for (got, expected) in s.terms.iter().zip([0.302042948, 0.242467258, 0.22313016]) {
        assert_abs_diff_eq!(*got, expected, epsilon = 1e-8);
    }
    assert_abs_diff_eq!(s.total, 0.76764036619880, epsilon = 1e-12);
    assert_abs_diff_eq!(
        j_current(-1, 3, 0.5, &q()).unwrap(),
        s.total,
        epsilon = 1e-12
    );
}

#[test]
fn far_right_is_empty() {
    let c = check_theorem_finite(8, 2, 0.3, &q()).unwrap();
    assert!(c.j.abs() < 1e-8 && c.v.abs() < 1e-8 && c.pass);
}

#[test]
fn theorem_sweep_with_terms_in_range() {
    let mut cells = Vec::new();
    for x in -4..=2 {
        for n in 1..=6 {
            for t in [0.3, 1.0, 2.0] {
                cells.push((x, n, t));
            }
        }
    }
    let checks = finite_sweep(&cells, &q()).unwrap();
    assert!(
        checks.iter().all(|c| c.pass),
        "{:?}",
        checks.iter().find(|c| !c.pass)
    );
    let eps = 10.0 * q().rel_tol;
    for &(x, n, t) in cells.iter().filter(|c| c.1 <= 4) {
        for term in v_series(x, n, t, &q()).unwrap().terms {
            assert!((-eps..=1.0 + eps).contains(&term));
        }
    }
}

#[test]
fn column_step_examples() {
    let r = recursion_step_check(&[], -1, 3, 0.5, &q()).unwrap();
    assert!(r.difference < 1e-8);
    assert_abs_diff_eq!(r.lhs, 0.7676403661988016, epsilon = 1e-12);
    let r = recursion_step_check(&[((-2, 2), (-2, 2))], -1, 3, 0.5, &q()).unwrap();
    assert!(r.difference < 1e-8);
    assert_abs_diff_eq!(r.lhs, 0.7127664172696693, epsilon = 1e-12);
    for m in 1..=4 {
        let r = recursion_step_check(&[], -1, m, 0.0, &q()).unwrap();
        let mut k = EqualTimeKernel::new(0.0, q()).unwrap();
        assert_abs_diff_eq!(r.lhs, k.get(-1, m, 0, m).unwrap(), epsilon = 1e-15);
        assert!(r.difference < 1e-10);
    }
}

#[test]
fn telescoping_reproduces_speed_terms() {
    for (x, n, t) in [(-1, 3, 0.5), (-2, 4, 1.0), (0, 2, 2.0), (-1, 1, 0.3)] {
        let (terms, leftover) = telescoped_series(x, n, t, &q()).unwrap();
        let series = v_series(x, n, t, &q()).unwrap();
        for (a, b) in terms.iter().zip(&series.terms) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        let total: f64 = terms.iter().sum::<f64>() + leftover;
        assert_abs_diff_eq!(total, j_current(x, n, t, &q()).unwrap(), epsilon = 1e-10);
        assert!(leftover.abs() < 1e-10);
    }
}

#[test]
fn stack_probabilities() {
    let s = Slope::<f64>::symmetric();
    let first = stationary_expectation(0, &s, &q()).unwrap();
    assert!(first > 0.0 && first < 1.0 / 3.0);
    let terms: Vec<f64> = (0..8)
        .map(|m| stationary_expectation(m, &s, &q()).unwrap())
        .collect();
    for m in 2..7 {
        assert!(terms[m + 1] < terms[m]);
    }
    for slope in [
        Slope::new(0.2, 0.3, 0.5).unwrap(),
        Slope::new(0.9, 0.05, 0.05).unwrap(),
    ] {
        for m in 0..6 {
            assert!(stationary_expectation(m, &slope, &q()).unwrap() >= -10.0 * q().rel_tol);
        }
    }
}

#[test]
fn stationary_series_totals() {
    let sym = v_series_stationary(&Slope::symmetric(), 1e-10, &q()).unwrap();
    assert_abs_diff_eq!(sym.total, 3f64.sqrt() / (2.0 * PI), epsilon = 1e-8);
    assert!(sym.terms.iter().all(|&t| t >= 0.0));
    let half = v_series_stationary(&Slope::new(0.5, 0.25, 0.25).unwrap(), 1e-10, &q()).unwrap();
    assert_abs_diff_eq!(half.total, 1.0 / (2.0 * PI), epsilon = 1e-8);
    let s = Slope::new(0.2, 0.3, 0.5).unwrap();
    let a = v_series_stationary(&s, 1e-10, &q()).unwrap();
    let b = v_series_stationary(&s.swap_bc(), 1e-10, &q()).unwrap();
    assert_abs_diff_eq!(a.total, b.total, epsilon = 1e-8);
    let coarse = v_series_stationary(&s, 1e-8, &q()).unwrap();
    assert!((coarse.total - a.total).abs() < 10.0 * 1e-8);
    assert_eq!(a.remainder_constant, 3.0);
    assert_abs_diff_eq!(
        a.remainder_bound,
        3.0 * a.terms[a.truncation_index],
        epsilon = 1e-20
    );
}

#[test]
fn three_routes() {
    for (pa, pb, pc) in [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        (0.5, 0.25, 0.25),
        (0.9, 0.05, 0.05),
    ] {
        let c = check_theorem_stationary(&Slope::new(pa, pb, pc).unwrap(), &q()).unwrap();
        assert!(c.pass && c.max_difference < 1e-6, "{c:?}");
        assert_abs_diff_eq!(c.kernel, closed_form(pa, pb, pc), epsilon = 1e-7);
    }
}

fn couples(rng: &mut ChaCha8Rng, x: i64, m: i64) -> Vec<Couple> {
    let rows_excluded = [(x, m), (x + 1, m - 1), (x, m - 1)];
    let cols_excluded = [(x + 1, m), (x, m), (x + 1, m - 1)];
    let size = rng.random_range(0..=3);
    let mut out: Vec<Couple> = Vec::new();
    while out.len() < size {
        let r = (rng.random_range(-4..=2), rng.random_range(1..=4));
        let c = (rng.random_range(-4..=2), rng.random_range(1..=4));
        if !rows_excluded.contains(&r)
            && !cols_excluded.contains(&c)
            && out.iter().all(|(a, b)| *a != r && *b != c)
        {
            out.push((r, c));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn column_step_holds(seed in any::<u64>(), x in -3i64..=1, m in 1i64..=4, late in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = couples(&mut rng, x, m);
        let mut k = EqualTimeKernel::new(if late { 1.0 } else { 0.3 }, q()).unwrap();
        let r = recursion_step_with(&mut k, &cs, x, m).unwrap();
        prop_assert!(r.difference < 1e-10, "{:?} {:?}", cs, r);
    }
}
