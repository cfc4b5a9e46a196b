//! Scalar abstractions.
//!
//! [`Real`] covers the floating point types the quadrature and kernel code is
//! written against. [`Field`] is the weaker contract needed by the dense
//! linear algebra: anything with exact field operations and a pivot
//! magnitude, which includes complex floats and exact rationals.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Field
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default relative tolerance for adaptive quadrature in this precision.
    fn default_rel_tol() -> Self;

    /// Tolerance used when checking that slope proportions sum to one.
    fn sum_tol() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable")
    }
}

impl Real for f64 {
    fn default_rel_tol() -> Self {
        1e-12
    }

    fn sum_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn default_rel_tol() -> Self {
        1e-5
    }

    fn sum_tol() -> Self {
        1e-6
    }
}

/// Scalars the LU factorization can work over.
pub trait Field: Num + Neg<Output = Self> + Clone + Debug {
    /// Size used for partial pivoting. Zero means the entry cannot be a pivot.
    fn magnitude(&self) -> f64;
}

impl Field for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Field for f32 {
    fn magnitude(&self) -> f64 {
        f64::from(self.abs())
    }
}

impl<T: Real> Field for Complex<T> {
    fn magnitude(&self) -> f64 {
        self.norm().to_f64().unwrap_or(f64::NAN)
    }
}

impl Field for BigRational {
    // Exact arithmetic: any nonzero pivot is as good as any other.
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

/// Edge weights of a honeycomb graph: an ordered field with absolute value.
pub trait Weight: Field + Signed + PartialOrd {
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl Weight for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Weight for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Weight for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
