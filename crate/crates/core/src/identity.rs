//! The current/speed identities.
//!
//! In the finite system the current `j(x, n, t)` is a single kernel entry
//! while the speed `v(x, n, t)` is a sum of `n` event probabilities, each a
//! determinant of kernel entries. In the stationary system the speed is a
//! single inverse Kasteleyn entry and also an infinite series of
//! probabilities of vertical stacks of type I lozenges.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_kinv_nu_single, EqualTimeKernel, QuadConfig};
use crate::linalg::{ComplexMatrix, Matrix};
use crate::scalar::Real;
use crate::stationary::{speed, Slope};

/// Remainder constant used when reporting a bound for a truncated series.
pub const REMAINDER_CONSTANT: f64 = 3.0;

/// Default truncation of the stationary series.
pub const STATIONARY_M_MAX: usize = 40;

// Terms must be decreasing past this index.
const MONOTONE_FROM: usize = 20;

pub fn det<T: Real>(m: &ComplexMatrix<T>) -> Complex<T> {
    m.det()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult<T> {
    pub terms: Vec<T>,
    pub total: T,
    pub truncation_index: usize,
    pub remainder_bound: T,
    pub remainder_constant: T,
}

impl<T: Real> SeriesResult<T> {
    fn finite(terms: Vec<T>) -> Self {
        let total = terms.iter().fold(T::zero(), |a, &b| a + b);
        Self {
            truncation_index: terms.len(),
            terms,
            total,
            remainder_bound: T::zero(),
            remainder_constant: T::zero(),
        }
    }
}

/// Matrix of the `l`-th speed term: the column `(x, n), ..., (x, n-l+1)` is
/// occupied and, for `l < n`, the site `(x+1, n-l)` is empty.
pub fn v_term_matrix<T: Real>(
    k: &mut EqualTimeKernel<T>,
    x: i64,
    n: i64,
    l: i64,
) -> Result<Matrix<T>> {
    if l < 1 || l > n {
        return Err(Error::InvalidConfig(format!(
            "term index {l} outside 1..={n}"
        )));
    }
    let size = if l < n { l + 1 } else { n };
    let mut m = Matrix::zeros(size as usize, size as usize);
    for i in 0..l {
        for j in 0..l {
            m[(i as usize, j as usize)] = k.get(x, n - i, x, n - j)?;
        }
    }
    if l < n {
        let last = l as usize;
        for i in 0..l {
            m[(i as usize, last)] = -k.get(x, n - i, x + 1, n - l)?;
            m[(last, i as usize)] = k.get(x + 1, n - l, x, n - i)?;
        }
        m[(last, last)] = T::one() - k.get(x + 1, n - l, x + 1, n - l)?;
    }
    Ok(m)
}

pub fn v_term_with<T: Real>(k: &mut EqualTimeKernel<T>, x: i64, n: i64, l: i64) -> Result<T> {
    Ok(v_term_matrix(k, x, n, l)?.det())
}

/// Probability that the level `n` particle at `x` moves and pushes exactly
/// `l` particles at time `t`.
pub fn v_term<T: Real>(x: i64, n: i64, t: T, l: i64, q: &QuadConfig<T>) -> Result<T> {
    v_term_with(&mut EqualTimeKernel::new(t, *q)?, x, n, l)
}

pub fn v_series_with<T: Real>(
    k: &mut EqualTimeKernel<T>,
    x: i64,
    n: i64,
) -> Result<SeriesResult<T>> {
    if n < 1 {
        return Err(Error::LevelOutOfRange { n, depth: 0 });
    }
    let terms = (1..=n)
        .map(|l| v_term_with(k, x, n, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesResult::finite(terms))
}

/// Speed of growth at `(x, n, t)` as a sum of event probabilities.
pub fn v_series<T: Real>(x: i64, n: i64, t: T, q: &QuadConfig<T>) -> Result<SeriesResult<T>> {
    v_series_with(&mut EqualTimeKernel::new(t, *q)?, x, n)
}

/// Current at `(x, n, t)`: the kernel entry `K_t(x, n; x+1, n)`.
pub fn j_current<T: Real>(x: i64, n: i64, t: T, q: &QuadConfig<T>) -> Result<T> {
    if n < 1 {
        return Err(Error::LevelOutOfRange { n, depth: 0 });
    }
    EqualTimeKernel::new(t, *q)?.get(x, n, x + 1, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteCheck<T> {
    pub x: i64,
    pub n: i64,
    pub t: T,
    pub j: T,
    pub v: T,
    pub difference: T,
    pub tolerance: T,
    pub pass: bool,
}

pub fn check_theorem_finite<T: Real>(
    x: i64,
    n: i64,
    t: T,
    q: &QuadConfig<T>,
) -> Result<FiniteCheck<T>> {
    let mut k = EqualTimeKernel::new(t, *q)?;
    if n < 1 {
        return Err(Error::LevelOutOfRange { n, depth: 0 });
    }
    let j = k.get(x, n, x + 1, n)?;
    let v = v_series_with(&mut k, x, n)?.total;
    let difference = (j - v).abs();
    let tolerance = T::lit(100.0) * q.rel_tol;
    Ok(FiniteCheck {
        x,
        n,
        t,
        j,
        v,
        difference,
        tolerance,
        pass: difference < tolerance,
    })
}

/// Runs [`check_theorem_finite`] over all cells in parallel, results in
/// input order.
pub fn finite_sweep<T: Real>(
    cells: &[(i64, i64, T)],
    q: &QuadConfig<T>,
) -> Result<Vec<FiniteCheck<T>>> {
    cells
        .par_iter()
        .map(|&(x, n, t)| check_theorem_finite(x, n, t, q))
        .collect()
}

/// A pair of space-time sites entering a kernel determinant as row (black)
/// and column (white).
pub type Couple = ((i64, i64), (i64, i64));

fn kernel_det<T: Real>(
    k: &mut EqualTimeKernel<T>,
    rows: &[(i64, i64)],
    cols: &[(i64, i64)],
) -> Result<T> {
    let mut m = Matrix::zeros(rows.len(), cols.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            m[(i, j)] = k.get(r.0, r.1, c.0, c.1)?;
        }
    }
    Ok(m.det())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionCheck<T> {
    pub lhs: T,
    /// Determinant with the extra pair `(x+1, m-1)`, `(x, m)`.
    pub first: T,
    /// Determinant with the extra pairs `(x, m-1)`, `(x+1, m-1)`.
    pub second: T,
    pub difference: T,
}

/// One step of the column recursion for kernel determinants:
///
/// `det[B, (x,m) | W, (x+1,m)]
///   = det[B, (x,m), (x+1,m-1) | W, (x+1,m), (x,m)]
///   - det[B, (x,m), (x,m-1), (x+1,m-1) | W, (x,m), (x+1,m-1), (x+1,m)]`
///
/// where `B` and `W` are the rows and columns of `couples`.
pub fn recursion_step_check<T: Real>(
    couples: &[Couple],
    x: i64,
    m: i64,
    t: T,
    q: &QuadConfig<T>,
) -> Result<RecursionCheck<T>> {
    let mut k = EqualTimeKernel::new(t, *q)?;
    recursion_step_with(&mut k, couples, x, m)
}

pub fn recursion_step_with<T: Real>(
    k: &mut EqualTimeKernel<T>,
    couples: &[Couple],
    x: i64,
    m: i64,
) -> Result<RecursionCheck<T>> {
    let excluded_rows = [(x, m), (x + 1, m - 1), (x, m - 1)];
    let excluded_cols = [(x + 1, m), (x, m), (x + 1, m - 1)];
    let rows: Vec<_> = couples.iter().map(|c| c.0).collect();
    let cols: Vec<_> = couples.iter().map(|c| c.1).collect();
    for (i, r) in rows.iter().enumerate() {
        if excluded_rows.contains(r) || rows[..i].contains(r) {
            return Err(Error::CouplePrecondition(format!(
                "row site {r:?} is excluded or repeated"
            )));
        }
    }
    for (i, c) in cols.iter().enumerate() {
        if excluded_cols.contains(c) || cols[..i].contains(c) {
            return Err(Error::CouplePrecondition(format!(
                "column site {c:?} is excluded or repeated"
            )));
        }
    }
    let with = |base: &[(i64, i64)], extra: &[(i64, i64)]| [base, extra].concat();
    let lhs = kernel_det(k, &with(&rows, &[(x, m)]), &with(&cols, &[(x + 1, m)]))?;
    let first = kernel_det(
        k,
        &with(&rows, &[(x, m), (x + 1, m - 1)]),
        &with(&cols, &[(x + 1, m), (x, m)]),
    )?;
    let second = kernel_det(
        k,
        &with(&rows, &[(x, m), (x, m - 1), (x + 1, m - 1)]),
        &with(&cols, &[(x, m), (x + 1, m - 1), (x + 1, m)]),
    )?;
    Ok(RecursionCheck {
        lhs,
        first,
        second,
        difference: (lhs - (first - second)).abs(),
    })
}

/// Signed terms obtained by iterating [`recursion_step_check`] down the
/// column from level `n`, together with the leftover determinant at level 0.
/// The terms reproduce the speed terms and sum to `K_t(x, n; x+1, n)` up to
/// the leftover.
pub fn telescoped_series<T: Real>(x: i64, n: i64, t: T, q: &QuadConfig<T>) -> Result<(Vec<T>, T)> {
    let mut k = EqualTimeKernel::new(t, *q)?;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut terms = Vec::new();
    let mut sign = T::one();
    for l in 1..=n {
        let m = n - l + 1;
        let r = [rows.clone(), vec![(x, m), (x + 1, m - 1)]].concat();
        let c = [cols.clone(), vec![(x + 1, m), (x, m)]].concat();
        terms.push(sign * kernel_det(&mut k, &r, &c)?);
        rows.extend([(x, m), (x + 1, m - 1)]);
        cols.extend([(x, m), (x + 1, m)]);
        sign = -sign;
    }
    let r = [rows.clone(), vec![(x, 0)]].concat();
    let c = [cols.clone(), vec![(x + 1, 0)]].concat();
    let leftover = sign * kernel_det(&mut k, &r, &c)?;
    Ok((terms, leftover))
}

/// Cache of stationary kernel entries keyed by offset.
struct NuKernel<'a, T> {
    slope: &'a Slope<T>,
    q: &'a QuadConfig<T>,
    cache: HashMap<(i64, i64), T>,
}

impl<T: Real> NuKernel<'_, T> {
    fn get(&mut self, dx: i64, dn: i64) -> Result<T> {
        if let Some(v) = self.cache.get(&(dx, dn)) {
            return Ok(*v);
        }
        let v = eval_kinv_nu_single(dx, dn, self.slope, self.q)?;
        self.cache.insert((dx, dn), v);
        Ok(v)
    }

    /// Probability of a stack of `m + 1` type I lozenges at `(0, 0)`, ...,
    /// `(0, -m)` with no type I lozenge at `(1, -m)`.
    fn stack(&mut self, m: i64) -> Result<T> {
        let mut blacks: Vec<(i64, i64)> = (0..=m).map(|i| (0, -i)).collect();
        let mut whites = blacks.clone();
        blacks.push((1, -m - 1));
        whites.push((1, -m));
        let mut mat = Matrix::zeros(blacks.len(), whites.len());
        for (i, b) in blacks.iter().enumerate() {
            for (j, w) in whites.iter().enumerate() {
                mat[(i, j)] = self.get(b.0 - w.0, b.1 - w.1)?;
            }
        }
        Ok(mat.det())
    }
}

/// `E[(1 - eta(x+1, n-m)) prod_{k<=m} eta(x, n-k)]` under the translation
/// invariant measure of slope `s`.
pub fn stationary_expectation<T: Real>(m: usize, s: &Slope<T>, q: &QuadConfig<T>) -> Result<T> {
    NuKernel {
        slope: s,
        q,
        cache: HashMap::new(),
    }
    .stack(m as i64)
}

/// Stationary speed as the series of stack probabilities, summed until a
/// term drops below `tol`.
pub fn v_series_stationary<T: Real>(
    s: &Slope<T>,
    tol: T,
    q: &QuadConfig<T>,
) -> Result<SeriesResult<T>> {
    v_series_stationary_capped(s, tol, STATIONARY_M_MAX, q)
}

pub fn v_series_stationary_capped<T: Real>(
    s: &Slope<T>,
    tol: T,
    m_max: usize,
    q: &QuadConfig<T>,
) -> Result<SeriesResult<T>> {
    let mut nu = NuKernel {
        slope: s,
        q,
        cache: HashMap::new(),
    };
    let c = T::lit(REMAINDER_CONSTANT);
    let mut terms: Vec<T> = Vec::new();
    for m in 0..=m_max {
        let term = nu.stack(m as i64)?;
        if m > MONOTONE_FROM && term >= terms[m - 1] {
            return Err(Error::NonDecreasingTerms { m });
        }
        terms.push(term);
        if term < tol {
            let total = terms.iter().fold(T::zero(), |a, &b| a + b);
            return Ok(SeriesResult {
                terms,
                total,
                truncation_index: m,
                remainder_bound: c * term,
                remainder_constant: c,
            });
        }
    }
    Err(Error::SeriesTruncated { m_max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryCheck<T> {
    pub slope: Slope<T>,
    /// `-K(black(x,n), white(x+1,n))` from the single integral.
    pub kernel: T,
    pub series: T,
    pub closed_form: T,
    pub truncation_index: usize,
    pub max_difference: T,
    pub tolerance: T,
    pub pass: bool,
}

pub fn check_theorem_stationary<T: Real>(
    s: &Slope<T>,
    q: &QuadConfig<T>,
) -> Result<StationaryCheck<T>> {
    let kernel = -eval_kinv_nu_single(-1, 0, s, q)?;
    let series = v_series_stationary(s, T::lit(1e-10).max(q.rel_tol), q)?;
    let closed_form = speed(s);
    let max_difference = (kernel - series.total)
        .abs()
        .max((kernel - closed_form).abs())
        .max((series.total - closed_form).abs());
    let tolerance = T::lit(1e-6).max(T::lit(100.0) * q.rel_tol);
    Ok(StationaryCheck {
        slope: *s,
        kernel,
        series: series.total,
        closed_form,
        truncation_index: series.truncation_index,
        max_difference,
        tolerance,
        pass: max_difference < tolerance,
    })
}
