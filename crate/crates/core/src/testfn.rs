//! Cutoff test functions and the integral bounds built on them.
//!
//! The unit profile is `Φ(u) = s(2u - 1)^λ` on `(1/2, 1)` with the reversed
//! smoothstep `s(v) = 1 - 3v² + 2v³ = (1-v)²(1+2v)`, equal to 1 before and 0
//! after. On the scale `T` the test function is `φ(t) = Φ(t/T)`.

use crate::error::{ensure, Error, Result};
use crate::fracops::quad::{adaptive, Tolerance};
use crate::fracops::{right_integral_tol, FracOrder, KernelMoments, QuadratureBudget};
use crate::math::{ceil, pow, sqrt};
use crate::specfun::gamma;

/// Unit-scale cutoff profile with smoothness power `lambda`, used with the
/// denominator exponent `p` in `|Φ'| / Φ^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    lambda: u32,
    p: f64,
}

impl CutoffProfile {
    /// Requires `λ >= 1`, `0 <= p < 1` and `2λ(1-p) >= 1`, which keeps
    /// `|Φ'|/Φ^p` bounded near `u = 1`.
    pub fn new(lambda: u32, p: f64) -> Result<Self> {
        ensure!(lambda >= 1, "profile power must be at least 1");
        ensure!((0.0..1.0).contains(&p), "denominator exponent must lie in [0, 1), got {p}");
        ensure!(
            2.0 * lambda as f64 * (1.0 - p) >= 1.0,
            "|Φ'|/Φ^p is unbounded for λ = {lambda}, p = {p} (need 2λ(1-p) >= 1)"
        );
        Ok(Self { lambda, p })
    }

    /// Profile for the source exponent `m`: `λ = choose_lambda(m)`, `p = 1/m`.
    pub fn for_exponent(m: f64) -> Result<Self> {
        Self::new(choose_lambda(m)?, 1.0 / m)
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `|Φ'(u)| / Φ(u)^p`, zero outside `(1/2, 1)` and extended continuously
    /// to `u = 1`.
    pub fn ratio(&self, u: f64) -> f64 {
        if u <= 0.5 || u > 1.0 {
            return 0.0;
        }
        let v = 2.0 * u - 1.0;
        let lam = self.lambda as f64;
        let q = lam * (1.0 - self.p);
        12.0 * lam * v * pow(1.0 - v, 2.0 * q - 1.0) * pow(1.0 + 2.0 * v, q - 1.0)
    }
}

/// Value and derivative of the unit profile at `u >= 0`.
pub fn profile_eval(prof: &CutoffProfile, u: f64) -> Result<(f64, f64)> {
    ensure!(u >= 0.0, "profile argument must be nonnegative, got {u}");
    if u <= 0.5 {
        return Ok((1.0, 0.0));
    }
    if u >= 1.0 {
        return Ok((0.0, 0.0));
    }
    let v = 2.0 * u - 1.0;
    let s = 1.0 - 3.0 * v * v + 2.0 * v * v * v;
    let ds = -6.0 * v * (1.0 - v);
    let lam = prof.lambda as i32;
    let value = pow(s, lam as f64);
    let derivative = lam as f64 * pow(s, (lam - 1) as f64) * ds * 2.0;
    Ok((value, derivative))
}

/// Smallest admissible profile power for exponent `m`: `max(2, ⌈m/(m-1)⌉)`.
pub fn choose_lambda(m: f64) -> Result<u32> {
    ensure!(m > 1.0 && m.is_finite(), "choose_lambda needs m > 1, got {m}");
    let conj = m / (m - 1.0);
    Ok((ceil(conj) as u32).max(2))
}

/// `sup |Φ'|/Φ^p` over `[1/2, 1)`: a dense scan followed by golden-section
/// refinement around the best sample.
pub fn k1_bound(prof: &CutoffProfile) -> Result<f64> {
    const SAMPLES: usize = 20_000;
    let f = |u: f64| prof.ratio(u);
    let du = 0.5 / SAMPLES as f64;
    let mut best = (0.0, 0.5);
    for i in 0..=SAMPLES {
        let u = 0.5 + i as f64 * du;
        let r = f(u);
        if r > best.0 {
            best = (r, u);
        }
    }
    let (mut a, mut b) = ((best.1 - du).max(0.5), (best.1 + du).min(1.0));
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let sup = best.0.max(fc).max(fd).max(f(1.0));
    ensure!(sup.is_finite() && sup > 0.0, "profile ratio bound is not finite");
    Ok(sup)
}

/// `I(T) = ∫_{T/2}^T (I_{T-}^{1-α} |φ'|/φ^p)^m dt` with `φ(t) = Φ(t/T)`.
///
/// Both quadratures use relative tolerances derived from `budget.abs_tol`, so
/// their refinement is identical across scales `T` and the exact scaling
/// `I(T) = T^(1-αm) I(1)` is reproduced to roundoff.
pub fn lemma8_integral(
    order_alpha: FracOrder,
    m: f64,
    prof: &CutoffProfile,
    big_t: f64,
    budget: QuadratureBudget,
) -> Result<f64> {
    let alpha = order_alpha.value();
    ensure!(alpha > 0.0 && alpha < 1.0, "order must lie in (0, 1), got {alpha}");
    ensure!(m > 0.0, "exponent m must be positive, got {m}");
    ensure!(big_t > 0.0 && big_t.is_finite(), "scale T must be positive, got {big_t}");
    let mut moments = KernelMoments::new(1.0 - alpha);
    let inner_tol = Tolerance::Relative(0.01 * budget.abs_tol);
    let g = |s: f64| prof.ratio(s / big_t) / big_t;
    let mut failure = None;
    let outer = |t: f64| {
        match right_integral_tol(&mut moments, g, t, big_t, inner_tol, budget.max_refinements) {
            Ok(v) => pow(v, m),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = adaptive(outer, 0.5 * big_t, big_t, Tolerance::Relative(0.1 * budget.abs_tol), 4000);
    if let Some(e) = failure {
        return Err(e);
    }
    result.map(|(v, _)| v)
}

/// `∫_{T/2}^T (|φ'|/φ^p)^m dt`, the first-order counterpart of
/// [`lemma8_integral`].
pub fn lemma9_integral(m: f64, prof: &CutoffProfile, big_t: f64, budget: QuadratureBudget) -> Result<f64> {
    ensure!(m > 0.0, "exponent m must be positive, got {m}");
    ensure!(big_t > 0.0 && big_t.is_finite(), "scale T must be positive, got {big_t}");
    let f = |t: f64| pow(prof.ratio(t / big_t) / big_t, m);
    let (v, _) = adaptive(f, 0.5 * big_t, big_t, Tolerance::Relative(0.1 * budget.abs_tol), 4000)?;
    Ok(v)
}

/// Which integral bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaKind {
    /// Fractional order `0 < α < 1`.
    Lemma8,
    /// First-order case `α = 1`.
    Lemma9,
}

/// Closed-form right-hand side and predicted `T`-exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaBound {
    pub rhs: f64,
    pub exponent: f64,
}

/// A computed integral next to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaBoundResult {
    pub lhs: f64,
    pub rhs: f64,
    pub exponent: f64,
}

impl LemmaBoundResult {
    pub fn holds(&self) -> bool {
        self.lhs >= 0.0 && self.lhs <= self.rhs
    }
}

/// `K_{α,m} = K₁^m / (2^(m(1-α)+1) Γ(2-α)^m (m(1-α)+1))`.
pub fn k_alpha_m(alpha: f64, m: f64, k1: f64) -> f64 {
    let e = m * (1.0 - alpha) + 1.0;
    pow(k1, m) / (pow(2.0, e) * pow(gamma(2.0 - alpha), m) * e)
}

/// `K_{α,m} T^(1-αm)` for the fractional case, `½ K₁^m T^(1-m)` for `α = 1`.
pub fn lemma_bound(kind: LemmaKind, alpha: f64, m: f64, k1: f64, big_t: f64) -> Result<LemmaBound> {
    ensure!(k1 > 0.0, "K1 must be positive, got {k1}");
    ensure!(m > 0.0, "exponent m must be positive, got {m}");
    ensure!(big_t > 0.0, "scale T must be positive, got {big_t}");
    match kind {
        LemmaKind::Lemma8 => {
            ensure!(alpha > 0.0 && alpha < 1.0, "fractional bound needs 0 < α < 1, got {alpha}");
            let exponent = 1.0 - alpha * m;
            Ok(LemmaBound { rhs: k_alpha_m(alpha, m, k1) * pow(big_t, exponent), exponent })
        }
        LemmaKind::Lemma9 => {
            ensure!(alpha == 1.0, "first-order bound needs α = 1, got {alpha}");
            let exponent = 1.0 - m;
            Ok(LemmaBound { rhs: 0.5 * pow(k1, m) * pow(big_t, exponent), exponent })
        }
    }
}

/// Computes the integral for `kind` with `K₁ = k1` and pairs it with its bound.
pub fn check_lemma(
    kind: LemmaKind,
    alpha: f64,
    m: f64,
    prof: &CutoffProfile,
    k1: f64,
    big_t: f64,
    budget: QuadratureBudget,
) -> Result<LemmaBoundResult> {
    let bound = lemma_bound(kind, alpha, m, k1, big_t)?;
    let lhs = match kind {
        LemmaKind::Lemma8 => lemma8_integral(FracOrder::new(alpha)?, m, prof, big_t, budget)?,
        LemmaKind::Lemma9 => lemma9_integral(m, prof, big_t, budget)?,
    };
    if !lhs.is_finite() {
        return Err(Error::Accuracy { what: "bound integral is not finite".into(), best: lhs, err: f64::NAN });
    }
    Ok(LemmaBoundResult { lhs, rhs: bound.rhs, exponent: bound.exponent })
}
