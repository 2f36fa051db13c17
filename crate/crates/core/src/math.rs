//! Thin aliases over `libm` so the numerical modules read like ordinary float code.

pub(crate) use libm::{ceil, cos, exp, fabs as abs, floor, log as ln, pow, sin, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// `true` if `x` is an integer in exact floating-point terms.
#[inline]
pub(crate) fn is_integer(x: f64) -> bool {
    x.is_finite() && floor(x) == x
}
