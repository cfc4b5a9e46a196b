//! Slope geometry of the translation-invariant measures.
//!
//! A slope `(p_a, p_b, p_c)` fixes angles `theta_k = pi p_k` of a triangle on
//! the base `[0, 1]`: `theta_b` sits at 0, `theta_c` at 1 and `theta_a` at
//! the apex `Omega`. By the law of sines the side lengths are proportional
//! to the lozenge weights `(a, b, c) = (sin theta_a, sin theta_b, sin theta_c)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope<T> {
    pub p_a: T,
    pub p_b: T,
    pub p_c: T,
}

impl<T: Real> Slope<T> {
    /// Proportions must be nonnegative and sum to one within `T::sum_tol()`.
    pub fn new(p_a: T, p_b: T, p_c: T) -> Result<Self> {
        let s = Self { p_a, p_b, p_c };
        if [p_a, p_b, p_c]
            .iter()
            .any(|p| !(*p >= T::zero()) || !p.is_finite())
        {
            return Err(Error::InvalidSlope(format!(
                "negative or non-finite proportion in {s:?}"
            )));
        }
        if (p_a + p_b + p_c - T::one()).abs() > T::sum_tol() {
            return Err(Error::InvalidSlope(format!(
                "proportions sum to {}",
                p_a + p_b + p_c
            )));
        }
        Ok(s)
    }

    pub fn symmetric() -> Self {
        let third = T::one() / T::lit(3.0);
        Self {
            p_a: third,
            p_b: third,
            p_c: third,
        }
    }

    pub fn is_rough(&self) -> bool {
        self.p_a > T::zero() && self.p_b > T::zero() && self.p_c > T::zero()
    }

    pub fn thetas(&self) -> (T, T, T) {
        let pi = T::PI();
        (pi * self.p_a, pi * self.p_b, pi * self.p_c)
    }

    /// The slope with `p_b` and `p_c` exchanged.
    pub fn swap_bc(&self) -> Self {
        Self {
            p_a: self.p_a,
            p_b: self.p_c,
            p_c: self.p_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Weights<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn scaled(&self, lambda: T) -> Self {
        Self::new(self.a * lambda, self.b * lambda, self.c * lambda)
    }

    /// Strict triangle inequality with positive sides.
    pub fn check_rough(&self) -> Result<()> {
        let (a, b, c) = (self.a, self.b, self.c);
        let ok =
            a > T::zero() && b > T::zero() && c > T::zero() && a < b + c && b < a + c && c < a + b;
        if ok {
            Ok(())
        } else {
            Err(Error::DegenerateTriangle {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
                c: c.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Apex of the slope triangle. Frozen slopes give a point on the real axis
/// (or at infinity when `p_a = 0`) with `frozen` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint<T> {
    pub value: Complex<T>,
    pub frozen: bool,
}

pub fn slope_to_weights<T: Real>(s: &Slope<T>) -> Result<Weights<T>> {
    if !s.is_rough() {
        return Err(Error::FrozenSlope);
    }
    let (ta, tb, tc) = s.thetas();
    Ok(Weights::new(ta.sin(), tb.sin(), tc.sin()))
}

pub fn weights_to_slope<T: Real>(w: &Weights<T>) -> Result<Slope<T>> {
    w.check_rough()?;
    let (a, b, c) = (w.a, w.b, w.c);
    let two = T::lit(2.0);
    let angle = |opp: T, s1: T, s2: T| ((s1 * s1 + s2 * s2 - opp * opp) / (two * s1 * s2)).acos();
    let (ta, tb) = (angle(a, b, c), angle(b, a, c));
    let pi = T::PI();
    let (p_a, p_b) = (ta / pi, tb / pi);
    Ok(Slope {
        p_a,
        p_b,
        p_c: T::one() - p_a - p_b,
    })
}

pub fn slope_to_omega<T: Real>(s: &Slope<T>) -> OmegaPoint<T> {
    let zero = T::zero();
    if s.is_rough() {
        let w = slope_to_weights(s).expect("rough slope");
        let (_, tb, _) = s.thetas();
        return OmegaPoint {
            value: Complex::from_polar(w.c / w.a, tb),
            frozen: false,
        };
    }
    let value = if s.p_a == zero {
        Complex::new(T::infinity(), zero)
    } else if s.p_c == zero {
        Complex::new(zero, zero)
    } else {
        Complex::new(T::one(), zero)
    };
    OmegaPoint {
        value,
        frozen: true,
    }
}

/// Growth speed `Im(Omega) / pi`. Zero when `p_b` or `p_c` vanishes; a
/// vanishing `p_a` alone sends the speed to infinity.
pub fn speed<T: Real>(s: &Slope<T>) -> T {
    let zero = T::zero();
    if s.p_b == zero || s.p_c == zero {
        return zero;
    }
    if s.p_a == zero {
        return T::infinity();
    }
    let (ta, tb, tc) = s.thetas();
    tb.sin() * tc.sin() / (T::PI() * ta.sin())
}

/// Speed of the dynamics where particles jump right at rate `p` and left at
/// rate `q`.
pub fn asymmetric_speed<T: Real>(s: &Slope<T>, p: T, q: T) -> T {
    if p == q {
        return T::zero();
    }
    (p - q) * speed(s)
}
