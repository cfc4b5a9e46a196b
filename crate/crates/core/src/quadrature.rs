//! Quadrature on circles and circular arcs.
//!
//! Closed contours use the trapezoid rule, which converges geometrically for
//! integrands analytic in an annulus around the circle. Arcs use composite
//! Gauss-Legendre panels. Both refine by doubling until two successive
//! estimates agree to `rel_tol * max(|I|, 1)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A positively oriented circle discretized with `nodes` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec<T> {
    pub center: Complex<T>,
    pub radius: T,
    pub nodes: usize,
}

impl<T: Real> ContourSpec<T> {
    pub fn new(center: Complex<T>, radius: T, nodes: usize) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "contour radius must be positive, got {radius}"
            )));
        }
        if nodes < 8 || !nodes.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "contour nodes must be a power of two >= 8, got {nodes}"
            )));
        }
        Ok(Self {
            center,
            radius,
            nodes,
        })
    }

    /// Points `w_k` and weights `(w_k - c)/N`, so that `sum f(w_k) * weight_k`
    /// approximates `(1/2 pi i) * integral of f`.
    pub fn points(&self) -> Vec<(Complex<T>, Complex<T>)> {
        circle_points(self.center, self.radius, self.nodes, 0, 1)
    }

    /// Single fixed-size trapezoid estimate of `(1/2 pi i) * integral of f`.
    pub fn integrate(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Complex<T> {
        self.points()
            .into_iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (w, h)| {
                acc + f(w) * h
            })
    }
}

// Nodes k = offset, offset + stride, ... of the N-point rule.
fn circle_points<T: Real>(
    center: Complex<T>,
    radius: T,
    n: usize,
    offset: usize,
    stride: usize,
) -> Vec<(Complex<T>, Complex<T>)> {
    let step = T::TAU() / T::from_usize(n).unwrap();
    let inv = T::one() / T::from_usize(n).unwrap();
    (offset..n)
        .step_by(stride)
        .map(|k| {
            let d = Complex::from_polar(radius, step * T::from_usize(k).unwrap());
            (center + d, d * inv)
        })
        .collect()
}

/// Refinement schedule shared by the adaptive rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement<T> {
    pub rel_tol: T,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl<T: Real> Default for Refinement<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::default_rel_tol(),
            min_nodes: 64,
            max_nodes: 1 << 16,
        }
    }
}

impl<T: Real> Refinement<T> {
    pub fn converged(&self, current: Complex<T>, previous: Complex<T>) -> bool {
        (current - previous).norm() <= self.rel_tol * current.norm().max(T::one())
    }

    pub fn failure(&self, nodes: usize, last: Complex<T>, previous: Complex<T>) -> Error {
        let pair = |z: Complex<T>| {
            (
                z.re.to_f64().unwrap_or(f64::NAN),
                z.im.to_f64().unwrap_or(f64::NAN),
            )
        };
        Error::QuadratureNonConvergence {
            nodes,
            last: pair(last),
            previous: pair(previous),
        }
    }
}

/// Converged integral with the node count that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: Complex<T>,
    pub nodes: usize,
}

/// `(1/2 pi i) * integral of f` over the circle `|w - center| = radius`.
///
/// Node counts double from `min_nodes`; each refinement only evaluates `f`
/// at the new midpoints.
pub fn circle_quadrature<T: Real>(
    f: impl Fn(Complex<T>) -> Complex<T>,
    center: Complex<T>,
    radius: T,
    refine: &Refinement<T>,
) -> Result<Estimate<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut n = refine.min_nodes.max(8).next_power_of_two();
    // Raw sum of f(w_k) (w_k - c) over the current nodes.
    let mut raw = circle_points(center, radius, n, 0, 1)
        .into_iter()
        .fold(zero, |acc, (w, h)| {
            acc + f(w) * h * T::from_usize(n).unwrap()
        });
    let mut current = raw / T::from_usize(n).unwrap();
    let mut previous = current;
    while n < refine.max_nodes {
        let m = 2 * n;
        let fresh = circle_points(center, radius, m, 1, 2)
            .into_iter()
            .fold(zero, |acc, (w, h)| {
                acc + f(w) * h * T::from_usize(m).unwrap()
            });
        raw = raw + fresh;
        n = m;
        previous = current;
        current = raw / T::from_usize(n).unwrap();
        if refine.converged(current, previous) {
            return Ok(Estimate {
                value: current,
                nodes: n,
            });
        }
    }
    Err(refine.failure(n, current, previous))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[order - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[order - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

const PANEL_ORDER: usize = 16;

/// Integral of a complex-valued `f` over the real interval `[a, b]` by
/// composite 16-point Gauss-Legendre, doubling the panel count until
/// converged. `refine.min_nodes` and `max_nodes` count total nodes.
pub fn arc_quadrature<T: Real>(
    f: impl Fn(T) -> Complex<T>,
    a: T,
    b: T,
    refine: &Refinement<T>,
) -> Result<Estimate<T>> {
    let (xs, ws) = gauss_legendre::<T>(PANEL_ORDER);
    let two = T::lit(2.0);
    let panel_sum = |panels: usize| {
        let h = (b - a) / T::from_usize(panels).unwrap();
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in 0..panels {
            let mid = a + h * (T::from_usize(p).unwrap() + T::lit(0.5));
            for (x, w) in xs.iter().zip(&ws) {
                acc = acc + f(mid + *x * h / two) * (*w * h / two);
            }
        }
        acc
    };
    let mut panels = (refine.min_nodes / PANEL_ORDER).max(1).next_power_of_two();
    let mut current = panel_sum(panels);
    let mut previous = current;
    while panels * PANEL_ORDER < refine.max_nodes {
        panels *= 2;
        previous = current;
        current = panel_sum(panels);
        if refine.converged(current, previous) {
            return Ok(Estimate {
                value: current,
                nodes: panels * PANEL_ORDER,
            });
        }
    }
    Err(refine.failure(panels * PANEL_ORDER, current, previous))
}
