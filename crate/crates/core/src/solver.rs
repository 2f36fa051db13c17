//! Solver for `D^α y + D^β y = f(t, y)` with `I^(1-α) y(0) = b`.
//!
//! The problem is integrated through its Volterra form
//!
//! ```text
//! y = F t^(α-1) - I^(α-β) y + I^α f(·, y)
//! ```
//!
//! with `y = t^(α-1) z` and `z` piecewise linear. Every convolution is a
//! product-integration sum, so each step solves one scalar equation for the
//! newest `z_j`.

use crate::error::{ensure, Result};
use crate::fracops::{derivative_any_order, FracOrder, ProductWeights, SingularGridFunction};
use crate::math::{abs, pow};
use crate::specfun::gamma;
use alloc::vec::Vec;

/// Sum of power terms `Σ c_i t^(e_i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum {
    pub terms: Vec<(f64, f64)>,
}

impl PowerSum {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|&(c, e)| c * pow(t, e)).sum()
    }

    /// `I^order` of the sum, term by term.
    pub fn integrate(&self, order: f64) -> PowerSum {
        let terms = self
            .terms
            .iter()
            .map(|&(c, e)| (c * gamma(e + 1.0) / gamma(e + 1.0 + order), e + order))
            .collect();
        PowerSum { terms }
    }
}

/// Target `y(t) = c1 t^(α-1) + c2 t^δ` of a manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedTarget {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
}

impl ManufacturedTarget {
    pub fn value(&self, alpha: f64, t: f64) -> f64 {
        self.c1 * pow(t, alpha - 1.0) + self.c2 * pow(t, self.delta)
    }
}

/// Right-hand side of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsMode {
    /// `f = scale · t^γ |y|^m`.
    PowerSource { scale: f64 },
    Zero,
    /// `f = D^α y* + D^β y*` for the given target `y*`.
    Manufactured(ManufacturedTarget),
}

/// Orders, source parameters and initial datum of one problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub alpha: FracOrder,
    pub beta: FracOrder,
    pub gamma: f64,
    pub m: f64,
    pub b: f64,
    pub rhs: RhsMode,
}

impl ProblemSpec {
    /// Requires `0 <= β <= α <= 1`, `α > 0`, `m > 1` and `b >= 0`. `β = 0`
    /// makes the damping term `y` itself.
    pub fn new(alpha: f64, beta: f64, gamma: f64, m: f64, b: f64, rhs: RhsMode) -> Result<Self> {
        let a = FracOrder::new(alpha)?;
        let bt = FracOrder::new(beta)?;
        ensure!(alpha > 0.0, "α must be positive");
        ensure!(beta <= alpha, "need β <= α (α={alpha}, β={beta})");
        ensure!(m > 1.0 && m.is_finite(), "exponent m must exceed 1, got {m}");
        ensure!(gamma.is_finite(), "γ must be finite");
        ensure!(b >= 0.0 && b.is_finite(), "initial datum b must be nonnegative, got {b}");
        if let RhsMode::PowerSource { scale } = rhs {
            ensure!(scale.is_finite(), "source scale must be finite");
        }
        Ok(Self { alpha: a, beta: bt, gamma, m, b, rhs })
    }

    /// Power source `t^γ |y|^m` with unit scale.
    pub fn power(alpha: f64, beta: f64, gamma: f64, m: f64, b: f64) -> Result<Self> {
        Self::new(alpha, beta, gamma, m, b, RhsMode::PowerSource { scale: 1.0 })
    }

    /// Manufactured problem; the initial datum is fixed by the target,
    /// `b = c1 Γ(α)`.
    pub fn manufactured(alpha: f64, beta: f64, target: ManufacturedTarget) -> Result<Self> {
        ensure!(target.delta > 0.0, "target exponent δ must be positive");
        Self::new(alpha, beta, 0.0, 2.0, target.c1 * gamma(alpha), RhsMode::Manufactured(target))
    }

    /// Hölder conjugate `m / (m - 1)`.
    pub fn m_prime(&self) -> f64 {
        self.m / (self.m - 1.0)
    }
}

/// Data of `y = F t^e - κ_d I^(α-β) y + κ_s I^α f`, where a damping order of
/// 0 means the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraForm {
    pub forcing_coeff: f64,
    pub forcing_exponent: f64,
    pub damping_order: f64,
    pub damping_coeff: f64,
    pub source_order: f64,
    pub source_coeff: f64,
}

/// Volterra form of the problem. For `α > β` the damping term starts from
/// `I^(1-β) y(0) = 0`; for `α = β` it carries the initial datum as well,
/// so the forcing doubles and the equation reads `2y = 2F t^(α-1) + I^α f`.
pub fn to_volterra(spec: &ProblemSpec) -> VolterraForm {
    let a = spec.alpha.value();
    let damping_order = a - spec.beta.value();
    let base = spec.b / gamma(a);
    VolterraForm {
        forcing_coeff: if damping_order == 0.0 { 2.0 * base } else { base },
        forcing_exponent: a - 1.0,
        damping_order,
        damping_coeff: 1.0,
        source_order: a,
        source_coeff: 1.0,
    }
}

/// `D^α y* + D^β y*` for `y* = c1 t^(α-1) + c2 t^δ` (the `D^α t^(α-1)` term
/// vanishes).
pub fn manufactured_rhs(alpha: FracOrder, beta: FracOrder, c1: f64, c2: f64, delta: f64) -> Result<PowerSum> {
    let (a, b) = (alpha.value(), beta.value());
    ensure!(delta > 0.0, "target exponent δ must be positive, got {delta}");
    ensure!(delta != a - 1.0, "target exponent δ must differ from α - 1");
    let g = gamma(delta + 1.0);
    ensure!(g.is_finite(), "Γ(δ+1) has a pole at δ = {delta}");
    let mut terms = Vec::new();
    let mut push = |c: f64, e: f64| {
        if c != 0.0 {
            terms.push((c, e));
        }
    };
    push(c2 * g * inv_gamma(delta + 1.0 - a), delta - a);
    push(c1 * gamma(a) * inv_gamma(a - b), a - 1.0 - b);
    push(c2 * g * inv_gamma(delta + 1.0 - b), delta - b);
    Ok(PowerSum { terms })
}

fn inv_gamma(x: f64) -> f64 {
    let g = gamma(x);
    if g.is_nan() {
        0.0
    } else {
        1.0 / g
    }
}

/// Source term in the `z` variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// `f = scale · t^(γ + mσ) |z|^m`.
    Power { gamma: f64, m: f64, scale: f64 },
    /// A known function of `t` only.
    Explicit(PowerSum),
}

impl Source {
    /// Source of `spec`, or `None` when it vanishes identically.
    pub fn of(spec: &ProblemSpec) -> Option<Source> {
        match spec.rhs {
            RhsMode::PowerSource { scale } if scale != 0.0 => {
                Some(Source::Power { gamma: spec.gamma, m: spec.m, scale })
            }
            RhsMode::PowerSource { .. } | RhsMode::Zero => None,
            RhsMode::Manufactured(t) => {
                let f = manufactured_rhs(spec.alpha, spec.beta, t.c1, t.c2, t.delta).ok()?;
                (!f.terms.is_empty()).then_some(Source::Explicit(f))
            }
        }
    }

    fn eval(&self, t: f64, y: f64) -> f64 {
        match self {
            Source::Power { gamma, m, scale } => scale * pow(t, *gamma) * pow(abs(y), *m),
            Source::Explicit(f) => f.eval(t),
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    Blowup,
    Stagnated,
}

/// Why a trajectory stopped early with [`Status::Blowup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeReason {
    /// `|y|` exceeded the cap.
    CapExceeded,
    /// The implicit step equation lost its bounded root: the discrete
    /// solution cannot be continued on this grid.
    NoBoundedRoot,
}

impl EscapeReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EscapeReason::CapExceeded => "cap_exceeded",
            EscapeReason::NoBoundedRoot => "no_bounded_root",
        }
    }
}

/// Computed nodes of a solve. `grid` has exponent `α - 1` and holds every
/// node that was reached, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: SingularGridFunction,
    pub status: Status,
    pub t_escape: Option<f64>,
    pub escape_reason: Option<EscapeReason>,
    /// Grid size requested, which exceeds `grid.n()` after an early stop.
    pub n_requested: usize,
    pub cap: f64,
}

impl Trajectory {
    /// End of the requested time interval.
    pub fn horizon(&self) -> f64 {
        self.grid.h() * self.n_requested as f64
    }

    pub fn values(&self) -> Vec<(f64, f64)> {
        (0..=self.grid.n()).map(|j| (self.grid.t(j), self.grid.value(j))).collect()
    }
}

enum Step {
    Root(f64),
    NoRoot,
    Failed,
}

/// Solves `a z = c + d |z|^m` for the root continuing the trajectory.
fn solve_node(a: f64, c: f64, d: f64, m: f64, start: f64) -> Step {
    const TOL: f64 = 1e-12;
    if d == 0.0 {
        return Step::Root(c / a);
    }
    let resid = |z: f64| a * z - c - d * pow(abs(z), m);
    let mut z = start;
    let mut omega = 1.0;
    let mut last = abs(resid(z));
    for _ in 0..50 {
        let g = (c + d * pow(abs(z), m)) / a;
        let next = z + omega * (g - z);
        if !next.is_finite() {
            break;
        }
        if abs(next - z) <= TOL * abs(next).max(1.0) {
            return Step::Root(next);
        }
        let r = abs(resid(next));
        if r > last {
            omega *= 0.5;
        }
        last = r;
        z = next;
    }

    // bracket the root on the branch through z = 0
    let (mut lo, mut hi) = if d > 0.0 && c >= 0.0 {
        // concave in z >= 0; the root lies left of the maximum z*
        let zs = pow(a / (d * m), 1.0 / (m - 1.0));
        if !(resid(zs) >= 0.0) {
            return Step::NoRoot;
        }
        (0.0, zs)
    } else if d > 0.0 {
        (c / a, 0.0)
    } else {
        return Step::Failed;
    };
    let mut r_lo = resid(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= TOL * abs(mid).max(1.0) {
            return Step::Root(mid);
        }
        let r = resid(mid);
        if (r <= 0.0) == (r_lo <= 0.0) {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
        }
    }
    Step::Failed
}

/// Marches `form` on `n` uniform steps of `[0, t_end]` with the unknown
/// `y = t^σ z`, `σ = form.forcing_exponent`.
pub fn solve_volterra(
    form: &VolterraForm,
    source: Option<&Source>,
    t_end: f64,
    n: usize,
    cap: f64,
) -> Result<Trajectory> {
    ensure!(n >= 16, "solver needs n >= 16 steps, got {n}");
    ensure!(t_end > 0.0 && t_end.is_finite(), "horizon must be positive, got {t_end}");
    ensure!(cap > 0.0, "blow-up cap must be positive, got {cap}");
    let sigma = form.forcing_exponent;
    ensure!(sigma > -1.0, "forcing exponent must exceed -1, got {sigma}");
    let mu_s = form.source_order;
    ensure!(mu_s > 0.0 && mu_s <= 1.0, "source order must lie in (0, 1], got {mu_s}");
    let mu_d = form.damping_order;
    ensure!(mu_d >= 0.0, "damping order must be nonnegative, got {mu_d}");
    let h = t_end / n as f64;

    let damping = (form.damping_coeff != 0.0 && mu_d > 0.0).then(|| ProductWeights::new(mu_d, sigma, n));
    let identity = if mu_d == 0.0 { form.damping_coeff } else { 0.0 };
    // power source: weight exponent of f = t^(γ + mσ) |z|^m
    let power = match source {
        Some(Source::Power { gamma, m, scale }) => {
            let sf = gamma + m * sigma;
            ensure!(
                sf > -1.0,
                "source t^γ|y|^m is not integrable at 0 for this solution class (γ + m(α-1) = {sf} <= -1)"
            );
            Some((ProductWeights::new(mu_s, sf, n), sf, *m, *scale))
        }
        _ => None,
    };
    let explicit = match source {
        Some(Source::Explicit(f)) => Some(f.integrate(mu_s)),
        _ => None,
    };

    let a0 = 1.0 + identity;
    let z0 = form.forcing_coeff / a0;
    let mut z = Vec::with_capacity(n + 1);
    let mut zeta = Vec::with_capacity(n + 1);
    z.push(z0);
    if let Some((_, _, m, _)) = power {
        zeta.push(pow(abs(z0), m));
    }
    let g_d = gamma(mu_d);
    let g_s = gamma(mu_s);
    let mut row_d = Vec::new();
    let mut row_s = Vec::new();
    let mut status = Status::Completed;
    let mut t_escape = None;
    let mut reason = None;

    for j in 1..=n {
        let jf = j as f64;
        let t = jf * h;
        let unweight = pow(jf, -sigma);
        let mut a = a0;
        let mut c = form.forcing_coeff;
        let mut d = 0.0;
        if let Some(w) = &damping {
            w.row(j, &mut row_d);
            let hist: f64 = row_d[..j].iter().zip(&z).map(|(w, z)| w * z).sum();
            let scale = form.damping_coeff * unweight * pow(h, mu_d) / g_d;
            a += scale * row_d[j];
            c -= scale * hist;
        }
        if let Some((w, sf, _, src_scale)) = &power {
            w.row(j, &mut row_s);
            let hist: f64 = row_s[..j].iter().zip(&zeta).map(|(w, v)| w * v).sum();
            let scale = form.source_coeff * src_scale * unweight * pow(h, mu_s + sf - sigma) / g_s;
            c += scale * hist;
            d = scale * row_s[j];
        }
        if let Some(f) = &explicit {
            c += form.source_coeff * f.eval(t) * pow(t, -sigma);
        }
        let m = power.as_ref().map_or(2.0, |p| p.2);
        match solve_node(a, c, d, m, z[j - 1]) {
            Step::Root(v) if v.is_finite() => {
                z.push(v);
                if power.is_some() {
                    zeta.push(pow(abs(v), m));
                }
                if abs(pow(t, sigma) * v) > cap {
                    status = Status::Blowup;
                    t_escape = Some(t);
                    reason = Some(EscapeReason::CapExceeded);
                    break;
                }
            }
            Step::NoRoot => {
                status = Status::Blowup;
                t_escape = Some(t);
                reason = Some(EscapeReason::NoBoundedRoot);
                break;
            }
            Step::Root(_) | Step::Failed => {
                status = Status::Stagnated;
                break;
            }
        }
    }
    Ok(Trajectory {
        grid: SingularGridFunction::from_parts(h, sigma, z),
        status,
        t_escape,
        escape_reason: reason,
        n_requested: n,
        cap,
    })
}

/// Solves `spec` on `n` uniform steps of `[0, t_end]`.
pub fn solve(spec: &ProblemSpec, t_end: f64, n: usize, cap: f64) -> Result<Trajectory> {
    ensure!(cap > spec.b, "blow-up cap must exceed b (cap={cap}, b={})", spec.b);
    let form = to_volterra(spec);
    solve_volterra(&form, Source::of(spec).as_ref(), t_end, n, cap)
}

/// `D^α y + D^β y - f(t, y)` at the trajectory nodes `1..=n` (node 0 is NaN).
pub fn residual(spec: &ProblemSpec, traj: &Trajectory) -> Result<SingularGridFunction> {
    ensure!(traj.status == Status::Completed, "residual needs a completed trajectory");
    let y = &traj.grid;
    let da = derivative_any_order(spec.alpha.value(), y)?;
    let db = derivative_any_order(spec.beta.value(), y)?;
    let source = Source::of(spec);
    let mut r = Vec::with_capacity(y.n() + 1);
    r.push(f64::NAN);
    for j in 1..=y.n() {
        let t = y.t(j);
        let f = source.as_ref().map_or(0.0, |s| s.eval(t, y.value(j)));
        r.push(da.value(j) + db.value(j) - f);
    }
    Ok(SingularGridFunction::from_parts(y.h(), 0.0, r))
}
