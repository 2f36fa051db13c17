//! Riemann-Liouville fractional integrals and derivatives.
//!
//! Left-sided operators act on [`SingularGridFunction`]s, i.e. grid samples of
//! `f(t) = t^σ z(t)`. The weight `t^σ` and the convolution kernel are
//! integrated exactly while `z` is interpolated piecewise-linearly, which keeps
//! second-order accuracy for functions in the weighted spaces where solutions
//! of Riemann-Liouville problems live. Right-sided integrals at a point take a
//! closure and refine a product-trapezoid rule until the requested tolerance.

pub mod quad;
mod weights;

pub(crate) use weights::{KernelMoments, ProductWeights};

use crate::error::{ensure, Error, Result};
use crate::math::{abs, pow};
use crate::specfun::gamma;
use alloc::format;
use alloc::vec::Vec;
use quad::Tolerance;

/// Order of a fractional integral or derivative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Accepts `0 <= value <= 1`. Derivative operations additionally reject
    /// the endpoints where they need to.
    pub fn new(value: f64) -> Result<Self> {
        ensure!(
            value.is_finite() && (0.0..=1.0).contains(&value),
            "fractional order must lie in [0, 1], got {value}"
        );
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Tolerance and refinement budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureBudget {
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl QuadratureBudget {
    pub fn new(abs_tol: f64, max_refinements: usize) -> Result<Self> {
        ensure!(abs_tol > 0.0, "quadrature abs_tol must be positive, got {abs_tol}");
        ensure!(max_refinements >= 1, "quadrature needs at least one refinement");
        Ok(Self { abs_tol, max_refinements })
    }
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self { abs_tol: 1e-8, max_refinements: 20 }
    }
}

/// Leading behaviour `coefficient · t^exponent` of a grid function at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointTerm {
    pub exponent: f64,
    pub coefficient: f64,
}

/// Samples of `f(t) = (t - t0)^σ z(t)` on the uniform grid `t_j = t0 + j h`.
///
/// `z[0]` is the continuous extension of `z` to the left endpoint. Operators
/// whose result is singular at `t0` store a non-finite `z[0]` and describe
/// the singularity in [`endpoint`](Self::endpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularGridFunction {
    t0: f64,
    h: f64,
    sigma: f64,
    z: Vec<f64>,
    endpoint: Option<EndpointTerm>,
}

impl SingularGridFunction {
    pub fn new(h: f64, sigma: f64, z: Vec<f64>) -> Result<Self> {
        ensure!(h > 0.0 && h.is_finite(), "grid step must be positive, got {h}");
        ensure!(sigma > -1.0, "endpoint exponent must exceed -1, got {sigma}");
        ensure!(z.len() >= 2, "grid needs at least one step");
        Ok(Self { t0: 0.0, h, sigma, z, endpoint: None })
    }

    /// Samples `z` at `n + 1` nodes of `[0, t_end]`.
    pub fn sample(t_end: f64, n: usize, sigma: f64, z: impl Fn(f64) -> f64) -> Result<Self> {
        ensure!(n >= 1, "grid needs at least one step");
        ensure!(t_end > 0.0, "grid end must be positive, got {t_end}");
        let h = t_end / n as f64;
        Self::new(h, sigma, (0..=n).map(|j| z(j as f64 * h)).collect())
    }

    /// Unchecked constructor; allows a single node for truncated results.
    pub(crate) fn from_parts(h: f64, sigma: f64, z: Vec<f64>) -> Self {
        Self { t0: 0.0, h, sigma, z, endpoint: None }
    }

    pub(crate) fn with_endpoint(mut self, term: EndpointTerm) -> Self {
        self.endpoint = Some(term);
        self
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn n(&self) -> usize {
        self.z.len() - 1
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    pub fn endpoint(&self) -> Option<EndpointTerm> {
        self.endpoint
    }
    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.h
    }

    /// The represented value `f(t_j)`; at `j = 0` the limit (possibly infinite).
    pub fn value(&self, j: usize) -> f64 {
        let z = self.z[j];
        if j > 0 {
            return pow(self.t(j) - self.t0, self.sigma) * z;
        }
        if !z.is_finite() || self.sigma == 0.0 {
            z
        } else if self.sigma > 0.0 || z == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(z)
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.n()).map(|j| self.value(j)).collect()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.n() == other.n() && abs(self.h - other.h) <= 1e-14 * self.h && self.t0 == other.t0
    }
}

/// Integral or derivative, for [`rl_power_rule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Integral,
    Derivative,
}

/// Closed form of `I^order t^μ` or `D^order t^μ` at `t > 0`.
pub fn rl_power_rule(kind: OperatorKind, order: FracOrder, mu: f64, t: f64) -> Result<f64> {
    ensure!(mu > -1.0, "power rule needs exponent > -1, got {mu}");
    ensure!(t > 0.0, "power rule evaluated at t = {t}, need t > 0");
    let a = order.value();
    match kind {
        OperatorKind::Integral => {
            if a == 0.0 {
                return Ok(pow(t, mu));
            }
            Ok(gamma(mu + 1.0) / gamma(mu + 1.0 + a) * pow(t, mu + a))
        }
        OperatorKind::Derivative => {
            if mu == a - 1.0 {
                return Ok(0.0);
            }
            ensure!(
                mu - a > -1.0,
                "derivative power rule needs μ - order > -1 or μ = order - 1 (μ={mu}, order={a})"
            );
            Ok(gamma(mu + 1.0) / gamma(mu + 1.0 - a) * pow(t, mu - a))
        }
    }
}

/// A positive-exponent leading term that can be split off a bounded grid
/// function and integrated in closed form.
fn splittable(f: &SingularGridFunction) -> Option<EndpointTerm> {
    f.endpoint
        .filter(|e| f.sigma == 0.0 && e.exponent > 0.0 && e.coefficient.is_finite() && e.coefficient != 0.0)
}

/// Sum `h^(μ+σ)/Γ(μ) Σ w[j,k] z_k` for every node, in the representation
/// with exponent `min(0, σ+μ)`.
///
/// A known leading term `c t^e` of `f` is integrated exactly and only the
/// smoother remainder goes through the weights. Bounded results record their
/// own leading term so later integrations can do the same.
fn left_integral_with(order: f64, f: &SingularGridFunction) -> SingularGridFunction {
    let n = f.n();
    let sigma = f.sigma;
    let shift = sigma + order;
    let out_sigma = if shift >= 0.0 { 0.0 } else { shift };
    let split = splittable(f);
    let rem;
    let zf = match split {
        Some(e) => {
            rem = (0..=n).map(|j| f.z[j] - e.coefficient * pow(f.t(j) - f.t0, e.exponent)).collect::<Vec<_>>();
            &rem
        }
        None => &f.z,
    };
    let plan = ProductWeights::new(order, sigma, n);
    let g_mu = gamma(order);
    let mut buf = Vec::with_capacity(n + 1);
    let mut z = Vec::with_capacity(n + 1);
    z.push(if shift > 0.0 {
        0.0
    } else {
        zf[0] * gamma(sigma + 1.0) / gamma(shift + 1.0)
    });
    for j in 1..=n {
        let s = plan.apply(j, zf, &mut buf);
        // t_j^(-out_sigma) h^(μ+σ) = j^(-out_sigma) h^(μ+σ-out_sigma)
        let scale = pow(j as f64, -out_sigma) * pow(f.h, shift - out_sigma) / g_mu;
        z.push(s * scale);
    }
    let lifted = split.map(|e| EndpointTerm {
        exponent: e.exponent + order,
        coefficient: e.coefficient * gamma(e.exponent + 1.0) / gamma(e.exponent + order + 1.0),
    });
    if let Some(l) = lifted {
        for (j, zj) in z.iter_mut().enumerate().skip(1) {
            *zj += l.coefficient * pow(j as f64 * f.h, l.exponent);
        }
    }
    let out = SingularGridFunction { t0: f.t0, h: f.h, sigma: out_sigma, z, endpoint: None };
    if out_sigma != 0.0 {
        return out;
    }
    let direct = zf[0] * gamma(sigma + 1.0) / gamma(shift + 1.0);
    let lead = if zf[0] != 0.0 && zf[0].is_finite() {
        Some(EndpointTerm { exponent: shift, coefficient: direct })
    } else {
        lifted
    };
    match lead {
        Some(l) => out.with_endpoint(l),
        None => out,
    }
}

/// Left Riemann-Liouville integral `I_0^order f` at every grid node.
///
/// The result carries exponent 0 when `σ + order >= 0` and `σ + order`
/// otherwise; node 0 holds the analytic limit.
pub fn rl_left_integral_grid(order: FracOrder, f: &SingularGridFunction) -> Result<SingularGridFunction> {
    let a = order.value();
    ensure!(a > 0.0, "left integral grid operator needs order in (0, 1], got {a}");
    Ok(left_integral_with(a, f))
}

/// Left Riemann-Liouville derivative `D_0^order f = d/dt I_0^(1-order) f`.
///
/// Interior nodes use centred differences of the integral, the right end a
/// one-sided second-order difference. Node 0 holds the analytic limit; when
/// that limit is infinite it is a non-finite sentinel and the leading term is
/// available from [`SingularGridFunction::endpoint`].
pub fn rl_left_derivative_grid(order: FracOrder, f: &SingularGridFunction) -> Result<SingularGridFunction> {
    let a = order.value();
    ensure!(a > 0.0 && a < 1.0, "grid derivative needs order in (0, 1), got {a}");
    ensure!(
        f.sigma + 1.0 - a >= 0.0,
        "grid derivative needs σ + 1 - order >= 0 (σ={}, order={a})",
        f.sigma
    );
    ensure!(f.n() >= 2, "grid derivative needs at least two steps");
    let inner = left_integral_with(1.0 - a, f);
    Ok(differentiate(&inner, f.sigma - a, f.z[0] * gamma(f.sigma + 1.0) * inv_gamma(f.sigma + 1.0 - a)))
}

fn inv_gamma(x: f64) -> f64 {
    let g = gamma(x);
    if g.is_nan() {
        0.0
    } else {
        1.0 / g
    }
}

/// Differentiates samples of a continuous function (exponent 0). The leading
/// term of the derivative at 0 is `coefficient · t^exponent`.
fn differentiate(g: &SingularGridFunction, exponent: f64, coefficient: f64) -> SingularGridFunction {
    let n = g.n();
    let h = g.h;
    let v = &g.z;
    let mut d = Vec::with_capacity(n + 1);
    d.push(0.0);
    for j in 1..n {
        d.push((v[j + 1] - v[j - 1]) / (2.0 * h));
    }
    d.push((3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h));
    d[0] = if coefficient == 0.0 {
        // the leading term vanished; the next one is t^(exponent + 1)
        if exponent + 1.0 > 0.0 {
            0.0
        } else {
            2.0 * d[1] - d[2]
        }
    } else if exponent > 0.0 {
        0.0
    } else if exponent == 0.0 {
        coefficient
    } else {
        f64::INFINITY.copysign(coefficient)
    };
    SingularGridFunction { t0: g.t0, h, sigma: 0.0, z: d, endpoint: None }
        .with_endpoint(EndpointTerm { exponent, coefficient })
}

/// Derivative of any order in `[0, 1]` on a grid: identity at 0, plain
/// differencing at 1 (for `σ = 0`), Riemann-Liouville in between.
pub(crate) fn derivative_any_order(order: f64, f: &SingularGridFunction) -> Result<SingularGridFunction> {
    if order == 0.0 {
        return Ok(f.clone());
    }
    if order == 1.0 {
        ensure!(f.sigma == 0.0, "first derivative on the grid needs a bounded function");
        ensure!(f.n() >= 2, "grid derivative needs at least two steps");
        return Ok(differentiate(f, 0.0, 0.0));
    }
    rl_left_derivative_grid(FracOrder::new(order)?, f)
}

/// Right integral with `n` panels: mirror onto `[0, b-t]` and apply the last
/// row of the product-trapezoid weights.
fn right_product_trapezoid(
    moments: &mut KernelMoments,
    g: &mut impl FnMut(f64) -> f64,
    t: f64,
    b: f64,
    n: usize,
) -> f64 {
    let step = (b - t) / n as f64;
    // node k of the mirrored grid sits at s = b - k step
    let mut right = g(b);
    let mut s = 0.0;
    for k in 0..n {
        let left = if k + 1 == n { g(t) } else { g(b - (k + 1) as f64 * step) };
        let (p0, p1) = moments.get(n - k);
        s += (p0 - p1) * right + p1 * left;
        right = left;
    }
    let mu = moments.mu();
    s * pow(step, mu) / gamma(mu)
}

/// Right-sided integral refined by doubling from 8 panels, with one
/// Richardson step on the second-order error. `moments` must have `μ = order`
/// and may be shared between calls.
pub(crate) fn right_integral_tol(
    moments: &mut KernelMoments,
    mut g: impl FnMut(f64) -> f64,
    t: f64,
    b: f64,
    tol: Tolerance,
    max_refinements: usize,
) -> Result<f64> {
    if b == t {
        return Ok(0.0);
    }
    let mut n = 8;
    let mut prev_q = right_product_trapezoid(moments, &mut g, t, b, n);
    let mut prev_r = f64::NAN;
    let mut err = f64::INFINITY;
    let mut best = prev_q;
    for _ in 0..max_refinements {
        n *= 2;
        let q = right_product_trapezoid(moments, &mut g, t, b, n);
        let r = q + (q - prev_q) / 3.0;
        err = if prev_r.is_nan() { abs(q - prev_q) } else { abs(r - prev_r) };
        best = r;
        if tol.accepts(err, r) {
            return Ok(r);
        }
        prev_q = q;
        prev_r = r;
    }
    Err(Error::Accuracy {
        what: format!("right-sided integral did not reach tolerance in {max_refinements} refinements"),
        best,
        err,
    })
}

/// Right Riemann-Liouville integral `I_{b-}^order g` at the point `t < b`.
pub fn rl_right_integral_at(
    order: FracOrder,
    g: impl FnMut(f64) -> f64,
    t: f64,
    b: f64,
    budget: QuadratureBudget,
) -> Result<f64> {
    let a = order.value();
    ensure!(a > 0.0, "right integral needs order in (0, 1], got {a}");
    ensure!(b > t, "right integral needs b > t (t={t}, b={b})");
    let mut moments = KernelMoments::new(a);
    right_integral_tol(&mut moments, g, t, b, Tolerance::Absolute(budget.abs_tol), budget.max_refinements)
}

/// `∫_0^{t_n} f(t) dt` for a grid function, exact in the weight `t^σ`.
fn grid_integral(f: &SingularGridFunction) -> f64 {
    let n = f.n();
    let plan = ProductWeights::new(1.0, f.sigma, n);
    let mut buf = Vec::new();
    plan.apply(n, &f.z, &mut buf) * pow(f.h, 1.0 + f.sigma)
}

fn product(a: &SingularGridFunction, b: &SingularGridFunction) -> Result<SingularGridFunction> {
    let sigma = a.sigma + b.sigma;
    ensure!(sigma > -1.0, "product of grid functions is not integrable (exponent {sigma})");
    let z = a.z.iter().zip(&b.z).map(|(x, y)| x * y).collect();
    SingularGridFunction::new(a.h, sigma, z)
}

/// Both sides of the fractional integration-by-parts identity
/// `∫ φ (I_0^order ψ) dt = ∫ ψ (I_{b-}^order φ) dt` over the grid interval.
///
/// `phi` must be bounded (exponent 0); `psi` may carry an endpoint exponent.
/// Returns `(lhs, rhs)`.
pub fn ibp_check(
    order: FracOrder,
    phi: &SingularGridFunction,
    psi: &SingularGridFunction,
    _budget: QuadratureBudget,
) -> Result<(f64, f64)> {
    ensure!(phi.same_grid(psi), "integration by parts needs phi and psi on the same grid");
    ensure!(phi.sigma == 0.0, "phi must be bounded (exponent 0), got {}", phi.sigma);
    let a = order.value();
    ensure!(a > 0.0, "integration by parts needs order > 0");
    let n = phi.n();
    let big_t = phi.t(n) - phi.t0;
    // ∫ ψ(s) (T-s)^a / Γ(a+1) ds, the integral of either side's singular part
    let corner = left_integral_with(a + 1.0, psi).z[n];

    // lhs: ∫ (φ - φ(0)) I^a ψ + φ(0) ∫ I^a ψ
    let left = rl_left_integral_grid(order, psi)?;
    let phi0 = phi.z[0];
    let shifted = SingularGridFunction::new(phi.h, 0.0, phi.z.iter().map(|v| v - phi0).collect())?;
    let lhs = grid_integral(&product(&shifted, &left)?) + phi0 * corner;

    // rhs: right integral of φ by mirroring, minus its (T-t)^a leading term
    let phi_end = phi.z[n];
    let mirrored = SingularGridFunction::new(phi.h, 0.0, phi.z.iter().rev().copied().collect())?;
    let right_m = left_integral_with(a, &mirrored);
    let lead = phi_end / gamma(a + 1.0);
    let smooth = (0..=n)
        .map(|j| right_m.z[n - j] - lead * pow(big_t - j as f64 * phi.h, a))
        .collect();
    let right = SingularGridFunction::new(phi.h, 0.0, smooth)?;
    let rhs = grid_integral(&product(psi, &right)?) + phi_end * corner;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests;
