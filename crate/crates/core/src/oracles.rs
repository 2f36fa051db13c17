//! Closed-form reference solutions and the nonexistence threshold.

use crate::error::{ensure, Result};
use crate::fracops::FracOrder;
use crate::math::{exp, ln, pow};
use crate::specfun::{mittag_leffler, SeriesAccuracy};

/// Solution of `y' = y^m`, `y(0) = b`, i.e. `[(1-m)(t+c)]^(1/(1-m))` with
/// `c = b^(1-m)/(1-m)`.
pub fn power_ode(b: f64, m: f64, t: f64) -> Result<f64> {
    ensure!(b > 0.0 && m > 1.0, "power ODE needs b > 0 and m > 1 (b={b}, m={m})");
    let t_star = power_ode_blowup_time(b, m)?;
    ensure!(t < t_star, "t = {t} is at or past the blow-up time {t_star}");
    let c = -t_star;
    Ok(pow((1.0 - m) * (t + c), 1.0 / (1.0 - m)))
}

/// `b^(1-m)/(m-1)`.
pub fn power_ode_blowup_time(b: f64, m: f64) -> Result<f64> {
    ensure!(b > 0.0 && m > 1.0, "power ODE needs b > 0 and m > 1 (b={b}, m={m})");
    Ok(pow(b, 1.0 - m) / (m - 1.0))
}

/// Solution of `y' + y = y^m`, `y(0) = b`:
/// `[1 + (b^(1-m) - 1) e^((m-1)t)]^(1/(1-m))`. For `b = 1` this is the
/// equilibrium `y ≡ 1`.
pub fn bernoulli(b: f64, m: f64, t: f64) -> Result<f64> {
    ensure!(b >= 1.0 && m > 1.0, "Bernoulli solution needs b >= 1 and m > 1 (b={b}, m={m})");
    ensure!(t >= 0.0, "time must be nonnegative, got {t}");
    if b > 1.0 {
        let t_star = bernoulli_blowup_time(b, m)?;
        ensure!(t < t_star, "t = {t} is at or past the blow-up time {t_star}");
    }
    let base = 1.0 + (pow(b, 1.0 - m) - 1.0) * exp((m - 1.0) * t);
    Ok(pow(base, 1.0 / (1.0 - m)))
}

/// `ln(1 - b^(1-m)) / (1-m)`.
pub fn bernoulli_blowup_time(b: f64, m: f64) -> Result<f64> {
    ensure!(b > 1.0 && m > 1.0, "Bernoulli blow-up needs b > 1 and m > 1 (b={b}, m={m})");
    Ok(ln(1.0 - pow(b, 1.0 - m)) / (1.0 - m))
}

/// Exact solution of the linear problem (`f = 0`):
/// `b t^(α-1) E_{α-β,α}(-t^(α-β))`.
pub fn ml_linear(alpha: FracOrder, beta: FracOrder, b: f64, t: f64, acc: SeriesAccuracy) -> Result<f64> {
    let (a, bt) = (alpha.value(), beta.value());
    ensure!(a > bt, "linear solution needs α > β (α={a}, β={bt})");
    ensure!(t > 0.0, "linear solution evaluated at t = {t}, need t > 0");
    if b == 0.0 {
        return Ok(0.0);
    }
    let d = a - bt;
    Ok(b * pow(t, a - 1.0) * mittag_leffler(d, a, -pow(t, d), acc)?)
}

/// Lower order and source exponent of a nonexistence threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub gamma: f64,
    pub order_low: f64,
}

impl ThresholdSpec {
    /// Requires `0 < order_low <= 1` and `γ >= -order_low`; at equality the
    /// range is empty.
    pub fn new(gamma: f64, order_low: f64) -> Result<Self> {
        ensure!(order_low > 0.0 && order_low <= 1.0, "lower order must lie in (0, 1], got {order_low}");
        ensure!(gamma >= -order_low, "threshold needs γ >= -order (γ={gamma}, order={order_low})");
        Ok(Self { gamma, order_low })
    }
}

/// Upper end of the nonexistence range `(1, m*]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    /// Every `m > 1` is in range.
    Unbounded,
}

impl Threshold {
    pub fn contains(self, m: f64) -> bool {
        match self {
            Threshold::Finite(ms) => m > 1.0 && m <= ms,
            Threshold::Unbounded => m > 1.0,
        }
    }
}

/// `m* = (γ+1)/(1-order_low)`, unbounded for `order_low = 1`.
pub fn threshold_m_star(th: ThresholdSpec) -> Threshold {
    if th.order_low >= 1.0 {
        Threshold::Unbounded
    } else {
        Threshold::Finite((th.gamma + 1.0) / (1.0 - th.order_low))
    }
}
