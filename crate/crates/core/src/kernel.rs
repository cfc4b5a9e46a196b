//! Correlation kernels.
//!
//! The finite-time kernel of the packed start is a sum of a single contour
//! integral around 0 (present only for ordered space-time pairs) and a double
//! integral with `w` around 0 and `z` around 1. The stationary inverse
//! Kasteleyn kernel is evaluated either as a single integral over an arc of
//! `|w| = c/a`, or as a double integral over the unit torus with the inner
//! integral done by residues.

use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{arc_quadrature, circle_quadrature, Estimate, Refinement};
use crate::scalar::Real;
use crate::stationary::{slope_to_weights, Slope, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig<T> {
    pub rel_tol: T,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Radius of the contour around 0.
    pub r0: T,
    /// Radius of the contour around 1.
    pub r1: T,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::default_rel_tol(),
            min_nodes: 64,
            max_nodes: 1 << 16,
            r0: T::lit(0.4),
            r1: T::lit(0.4),
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.r0 > T::zero() && self.r1 > T::zero()) {
            return bad(format!(
                "radii must be positive, got {} and {}",
                self.r0, self.r1
            ));
        }
        if !(self.r0 + self.r1 < T::one()) {
            return bad(format!(
                "contours overlap: r0 + r1 = {} >= 1",
                self.r0 + self.r1
            ));
        }
        if !(self.rel_tol.to_f64().unwrap_or(0.0) >= 1e-14) {
            return bad(format!("rel_tol must be >= 1e-14, got {}", self.rel_tol));
        }
        if self.min_nodes < 8
            || !self.min_nodes.is_power_of_two()
            || self.max_nodes < self.min_nodes
        {
            return bad(format!(
                "node range {}..{} must start at a power of two >= 8",
                self.min_nodes, self.max_nodes
            ));
        }
        Ok(())
    }

    pub fn refinement(&self) -> Refinement<T> {
        Refinement {
            rel_tol: self.rel_tol,
            min_nodes: self.min_nodes,
            max_nodes: self.max_nodes,
        }
    }

    /// Tolerance on the imaginary part of quantities that must be real.
    pub fn real_tol(&self) -> T {
        T::lit(10.0) * self.rel_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint<T> {
    pub x: i64,
    pub n: i64,
    pub t: T,
}

impl<T> SpaceTimePoint<T> {
    pub fn new(x: i64, n: i64, t: T) -> Self {
        Self { x, n, t }
    }
}

/// `(n1, t1) < (n2, t2)`: `n1 <= n2`, `t1 >= t2` and the pairs differ.
pub fn precedes<T: PartialOrd>(a: (i64, T), b: (i64, T)) -> bool {
    a.0 <= b.0 && a.1 >= b.1 && (a.0 != b.0 || a.1 != b.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue<T> {
    pub value: Complex<T>,
    /// Largest node count per contour used by any term.
    pub nodes_used: usize,
}

/// Returns the real part of `z` if its imaginary part is within `tol` (scaled
/// by `max(1, |Re z|)`).
pub fn real_part<T: Real>(z: Complex<T>, tol: T) -> Result<T> {
    if z.im.abs() <= tol * z.re.abs().max(T::one()) {
        Ok(z.re)
    } else {
        Err(Error::ImaginaryPart {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Finite-time kernel entry between two space-time points.
pub fn eval_k<T: Real>(
    p1: SpaceTimePoint<T>,
    p2: SpaceTimePoint<T>,
    q: &QuadConfig<T>,
) -> Result<KernelValue<T>> {
    q.validate()?;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut total = zero;
    let mut nodes_used = 0;
    if precedes((p1.n, p1.t), (p2.n, p2.t)) {
        let dt = p1.t - p2.t;
        let (px, pn) = (p2.x - p1.x + 1, p2.n - p1.n);
        let f =
            |w: Complex<T>| (w.inv() * dt).exp() / (w.powi(px as i32) * (one - w).powi(pn as i32));
        let est = circle_quadrature(f, zero, q.r0, &q.refinement())?;
        total = total - est.value;
        nodes_used = est.nodes;
    }
    let est = double_term(p1, p2, q)?;
    Ok(KernelValue {
        value: total + est.value,
        nodes_used: nodes_used.max(est.nodes),
    })
}

fn double_term<T: Real>(
    p1: SpaceTimePoint<T>,
    p2: SpaceTimePoint<T>,
    q: &QuadConfig<T>,
) -> Result<Estimate<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let outer =
        |w: Complex<T>| (w.inv() * p1.t).exp() * (one - w).powi(p1.n as i32) * w.powi(p1.x as i32);
    let inner = |z: Complex<T>| {
        (-z.inv() * p2.t).exp() / ((one - z).powi(p2.n as i32) * z.powi((p2.x + 1) as i32))
    };
    let refine = q.refinement();
    let sum = |n: usize| -> Complex<T> {
        let step = T::TAU() / T::from_usize(n).unwrap();
        let inv = T::one() / T::from_usize(n).unwrap();
        let nodes = |c: Complex<T>,
                     r: T,
                     f: &dyn Fn(Complex<T>) -> Complex<T>|
         -> Vec<(Complex<T>, Complex<T>)> {
            (0..n)
                .map(|k| {
                    let d = Complex::from_polar(r, step * T::from_usize(k).unwrap());
                    let w = c + d;
                    (w, f(w) * d * inv)
                })
                .collect()
        };
        let ws = nodes(zero, q.r0, &outer);
        let zs = nodes(one, q.r1, &inner);
        let mut acc = zero;
        for (w, fw) in &ws {
            let mut row = zero;
            for (z, gz) in &zs {
                row = row + *gz / (*w - *z);
            }
            acc = acc + *fw * row;
        }
        acc
    };
    let mut n = refine.min_nodes;
    let mut current = sum(n);
    let mut previous = current;
    while n < refine.max_nodes {
        n *= 2;
        previous = current;
        current = sum(n);
        if refine.converged(current, previous) {
            return Ok(Estimate {
                value: current,
                nodes: n,
            });
        }
    }
    Err(refine.failure(n, current, previous))
}

/// Memoized equal-time kernel entries `K_t(x1, n1; x2, n2)`, checked to be
/// real.
#[derive(Debug, Clone)]
pub struct EqualTimeKernel<T> {
    t: T,
    q: QuadConfig<T>,
    cache: HashMap<(i64, i64, i64, i64), T>,
}

impl<T: Real> EqualTimeKernel<T> {
    pub fn new(t: T, q: QuadConfig<T>) -> Result<Self> {
        q.validate()?;
        if !(t >= T::zero()) {
            return Err(Error::InvalidConfig(format!("time must be >= 0, got {t}")));
        }
        Ok(Self {
            t,
            q,
            cache: HashMap::new(),
        })
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn config(&self) -> &QuadConfig<T> {
        &self.q
    }

    pub fn get(&mut self, x1: i64, n1: i64, x2: i64, n2: i64) -> Result<T> {
        if let Some(v) = self.cache.get(&(x1, n1, x2, n2)) {
            return Ok(*v);
        }
        let k = eval_k(
            SpaceTimePoint::new(x1, n1, self.t),
            SpaceTimePoint::new(x2, n2, self.t),
            &self.q,
        )?;
        let v = real_part(k.value, self.q.real_tol())?;
        self.cache.insert((x1, n1, x2, n2), v);
        Ok(v)
    }
}

fn sign<T: Real>(e: i64) -> T {
    if e.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Stationary inverse Kasteleyn kernel in the normalized gauge at offset
/// `(dx, dn)` = black minus white, as a single integral over an arc of
/// `|w| = c/a` between `conj(Omega)` and `Omega`: the arc through the
/// positive reals when `dn >= 0`, the complementary arc otherwise.
pub fn eval_kinv_nu_single<T: Real>(
    dx: i64,
    dn: i64,
    s: &Slope<T>,
    q: &QuadConfig<T>,
) -> Result<T> {
    q.validate()?;
    let w = slope_to_weights(s)?;
    let r = w.c / w.a;
    let (_, tb, _) = s.thetas();
    let one = Complex::new(T::one(), T::zero());
    let integrand = |phi: T| {
        let w = Complex::from_polar(r, phi);
        (w - one).powi(dn as i32) * w.powi((-dn - dx) as i32)
    };
    let (lo, hi, outer) = if dn >= 0 {
        (-tb, tb, sign::<T>(dn + dx))
    } else {
        (tb, T::TAU() - tb, -sign::<T>(dn + dx))
    };
    let est = arc_quadrature(integrand, lo, hi, &q.refinement())?;
    real_part(est.value * (outer / T::TAU()), q.real_tol())
}

/// Stationary inverse Kasteleyn kernel with weights `(a, b, c)` at offset
/// `(dx, dn)`, as a double integral over the unit torus. The inner `z`
/// integral is the residue at `z = -(a + c w)/b`, which lies inside the unit
/// circle exactly on the arc `phi* < arg w < 2 pi - phi*`.
pub fn eval_kinv_abc_double<T: Real>(
    dx: i64,
    dn: i64,
    weights: &Weights<T>,
    q: &QuadConfig<T>,
) -> Result<T> {
    q.validate()?;
    weights.check_rough()?;
    let (a, b, c) = (weights.a, weights.b, weights.c);
    let two = T::lit(2.0);
    let phi_star = ((b * b - a * a - c * c) / (two * a * c)).acos();
    let integrand = |phi: T| {
        let w = Complex::from_polar(T::one(), phi);
        let pole = -(w * c + a) / b;
        w.powi((-dn - dx) as i32) * pole.powi(dn as i32) / b
    };
    let (lo, hi, outer) = if dn >= 0 {
        (phi_star, T::TAU() - phi_star, T::one())
    } else {
        (-phi_star, phi_star, -T::one())
    };
    let est = arc_quadrature(integrand, lo, hi, &q.refinement())?;
    real_part(est.value * (outer / T::TAU()), q.real_tol())
}

/// Gauge factor `b (a/c)^dx (b/c)^dn` between the weighted and normalized
/// stationary kernels.
pub fn nu_prefactor<T: Real>(dx: i64, dn: i64, weights: &Weights<T>) -> T {
    let (a, b, c) = (weights.a, weights.b, weights.c);
    b * (a / c).powi(dx as i32) * (b / c).powi(dn as i32)
}

/// Normalized kernel computed through the weighted double integral.
pub fn nu_from_abc<T: Real>(
    dx: i64,
    dn: i64,
    weights: &Weights<T>,
    q: &QuadConfig<T>,
) -> Result<T> {
    Ok(nu_prefactor(dx, dn, weights) * eval_kinv_abc_double(dx, dn, weights, q)?)
}
