//! The four subcommands. Each returns a [`Report`] and whether its own checks
//! passed.

use crate::defaults as d;
use crate::emit::{num_json, opt_json, Cell, Report, Table};
use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use fracblow_core::blowup::{check_grids, detect, estimate_blowup_time, scan_cell, scan_order, ScanSetup};
use fracblow_core::fracops::{FracOrder, QuadratureBudget};
use fracblow_core::oracles::{
    bernoulli, bernoulli_blowup_time, ml_linear, power_ode, power_ode_blowup_time, threshold_m_star, Threshold,
    ThresholdSpec,
};
use fracblow_core::solver::{solve, ManufacturedTarget, ProblemSpec, RhsMode, Status};
use fracblow_core::specfun::SeriesAccuracy;
use fracblow_core::testfn::{check_lemma, k1_bound, CutoffProfile, LemmaKind};
use rayon::prelude::*;
use serde_json::Value;

/// A command-line value that fails a precondition; reported with exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

macro_rules! invalid {
    ($($fmt:tt)+) => {
        return Err(Invalid(format!($($fmt)+)).into())
    };
}

pub struct Outcome {
    pub report: Report,
    pub ok: bool,
}

fn passed(report: Report) -> Outcome {
    Outcome { report, ok: true }
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Order α in (0, 1]; α = 1 checks the first-order bound
    #[arg(long, default_value_t = d::VERIFY_ALPHA)]
    pub alpha: f64,
    /// Source exponent m > 1
    #[arg(long, default_value_t = d::VERIFY_M)]
    pub m: f64,
    /// Scales T at which the integral is evaluated
    #[arg(long = "T", value_delimiter = ',', default_values_t = d::VERIFY_T.to_vec())]
    pub big_t: Vec<f64>,
    /// Profile power λ [default: max(2, ⌈m/(m-1)⌉)]
    #[arg(long)]
    pub lambda: Option<u32>,
    /// Denominator exponent p [default: 1/m]
    #[arg(long)]
    pub p: Option<f64>,
    /// Quadrature tolerance
    #[arg(long, default_value_t = d::ABS_TOL)]
    pub abs_tol: f64,
    /// Allowed deviation of the fitted T-exponent from the predicted one
    #[arg(long, default_value_t = d::SLOPE_TOL)]
    pub slope_tol: f64,
    /// Negate K₁ in the bound; every row must then fail (harness self-test)
    #[arg(long)]
    pub negate_k1: bool,
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

pub fn verify_lemmas(a: &VerifyArgs) -> Result<Outcome> {
    if !(a.alpha > 0.0 && a.alpha <= 1.0) {
        invalid!("--alpha must lie in (0, 1], got {}", a.alpha);
    }
    if !(a.m > 1.0 && a.m.is_finite()) {
        invalid!("--m must exceed 1, got {}", a.m);
    }
    if a.big_t.is_empty() || a.big_t.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        invalid!("--T needs positive scales, got {:?}", a.big_t);
    }
    let prof = match (a.lambda, a.p) {
        (None, None) => CutoffProfile::for_exponent(a.m)?,
        (lam, p) => CutoffProfile::new(
            lam.map_or_else(|| fracblow_core::testfn::choose_lambda(a.m), Ok)?,
            p.unwrap_or(1.0 / a.m),
        )?,
    };
    let budget = QuadratureBudget::new(a.abs_tol, d::MAX_REFINEMENTS)?;
    let kind = if a.alpha == 1.0 { LemmaKind::Lemma9 } else { LemmaKind::Lemma8 };
    let k1 = k1_bound(&prof)?;
    let sign = if a.negate_k1 { -1.0 } else { 1.0 };

    let mut results = Vec::with_capacity(a.big_t.len());
    for &t in &a.big_t {
        let r = check_lemma(kind, a.alpha, a.m, &prof, k1, t, budget).with_context(|| format!("bound integral at T = {t}"))?;
        // K₁ enters the bound only through K₁^m; negation flips the bound's sign
        results.push((t, r.lhs, sign * r.rhs, r.exponent));
    }
    let fit = loglog_slope(&results.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let predicted = results[0].3;

    let mut table = Table::new(&["T", "I_of_T", "bound", "exponent_fit"]);
    let mut ok = true;
    for &(t, lhs, rhs, _) in &results {
        if !(lhs >= 0.0 && lhs <= rhs) {
            eprintln!("bound violated at T = {t}: I(T) = {lhs:e} > {rhs:e}");
            ok = false;
        }
        table.push(vec![Cell::Num(t), Cell::Num(lhs), Cell::Num(rhs), Cell::Opt(fit)]);
    }
    if let Some(s) = fit {
        if (s - predicted).abs() > a.slope_tol {
            eprintln!("fitted T-exponent {s} differs from {predicted} by more than {}", a.slope_tol);
            ok = false;
        }
    }
    let mut report = Report::new(table);
    report.set("kind", Value::String(if kind == LemmaKind::Lemma8 { "fractional" } else { "first_order" }.into()));
    report.set("alpha", num_json(a.alpha));
    report.set("m", num_json(a.m));
    report.set("lambda", Value::from(prof.lambda()));
    report.set("p", num_json(prof.p()));
    report.set("k1", num_json(sign * k1));
    report.set("exponent_predicted", num_json(predicted));
    report.set("holds", Value::Bool(ok));
    Ok(Outcome { report, ok })
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rhs {
    /// f = scale · t^γ |y|^m
    Power,
    /// f = 0
    Zero,
    /// f such that y = c1 t^(α-1) + c2 t^δ is the exact solution; b = c1 Γ(α)
    Manufactured,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[arg(long, default_value_t = d::ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = d::BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = d::GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = d::M)]
    pub m: f64,
    /// Initial value I^(1-α) y (0+)
    #[arg(long, default_value_t = d::B)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = Rhs::Power)]
    pub rhs: Rhs,
    /// Factor in front of the power source
    #[arg(long, default_value_t = d::SOURCE_SCALE)]
    pub source_scale: f64,
    #[arg(long, default_value_t = d::C1)]
    pub c1: f64,
    #[arg(long, default_value_t = d::C2)]
    pub c2: f64,
    #[arg(long, default_value_t = d::DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = d::T_END)]
    pub t_end: f64,
    /// Number of grid intervals
    #[arg(long, default_value_t = d::N)]
    pub n: usize,
    /// Blow-up threshold on |y|
    #[arg(long, default_value_t = d::CAP)]
    pub cap: f64,
}

pub fn solve_cmd(a: &SolveArgs) -> Result<Outcome> {
    let spec = match a.rhs {
        Rhs::Power => ProblemSpec::new(
            a.alpha,
            a.beta,
            a.gamma,
            a.m,
            a.b,
            RhsMode::PowerSource { scale: a.source_scale },
        )?,
        Rhs::Zero => ProblemSpec::new(a.alpha, a.beta, a.gamma, a.m, a.b, RhsMode::Zero)?,
        Rhs::Manufactured => {
            ProblemSpec::manufactured(a.alpha, a.beta, ManufacturedTarget { c1: a.c1, c2: a.c2, delta: a.delta })?
        }
    };
    let traj = solve(&spec, a.t_end, a.n, a.cap)?;
    let mut rep = detect(&traj, a.cap);
    if rep.status == Status::Blowup {
        if let Ok((ts, q)) = estimate_blowup_time(&traj, a.m) {
            rep.t_star_estimate = Some(ts);
            rep.fit_quality = Some(q);
        }
    }
    let mut table = Table::new(&["t", "y"]);
    for (t, y) in traj.values() {
        if y.is_finite() {
            table.push(vec![Cell::Num(t), Cell::Num(y)]);
        }
    }
    let mut report = Report::new(table);
    report.set("status", Value::String(rep.status.as_str().into()));
    report.set("t_escape", opt_json(rep.t_escape));
    report.set("t_star_estimate", opt_json(rep.t_star_estimate));
    report.set("fit_quality", opt_json(rep.fit_quality));
    report.set("escape_reason", rep.escape_reason.map_or(Value::Null, |r| Value::String(r.as_str().into())));
    Ok(passed(report))
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[arg(long, default_value_t = d::SCAN_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = d::SCAN_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = d::B)]
    pub b: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = d::GAMMA_GRID.to_vec())]
    pub gamma_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = d::M_GRID.to_vec())]
    pub m_grid: Vec<f64>,
    #[arg(long, default_value_t = d::HORIZON)]
    pub horizon: f64,
    #[arg(long, default_value_t = d::SCAN_N)]
    pub n: usize,
    #[arg(long, default_value_t = d::CAP)]
    pub cap: f64,
    /// Worker threads [default: all cores]; the output does not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn scan_cmd(a: &ScanArgs) -> Result<Outcome> {
    let setup = ScanSetup::new(a.alpha, a.beta, a.b, a.horizon, a.n, a.cap)?;
    check_grids(&a.gamma_grid, &a.m_grid)?;
    if a.threads == Some(0) {
        invalid!("--threads must be at least 1");
    }
    let cells = scan_order(&a.gamma_grid, &a.m_grid);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads.unwrap_or(0)).build()?;
    let cells: Vec<_> = pool.install(|| cells.par_iter().map(|&(g, m)| scan_cell(&setup, g, m)).collect());

    let mut table =
        Table::new(&["gamma", "m", "in_theorem_range", "status", "t_escape", "t_star_estimate", "fit_quality"]);
    for c in &cells {
        table.push(vec![
            Cell::Num(c.gamma),
            Cell::Num(c.m),
            Cell::Bool(c.in_theorem_range),
            Cell::Text(c.report.status.as_str().into()),
            Cell::Opt(c.report.t_escape),
            Cell::Opt(c.report.t_star_estimate),
            Cell::Opt(c.report.fit_quality),
        ]);
    }
    let mut report = Report::new(table);
    report.set("alpha", num_json(a.alpha));
    report.set("beta", num_json(a.beta));
    report.set("b", num_json(a.b));
    report.set("horizon", num_json(a.horizon));
    report.set("n", Value::from(a.n));
    report.set("cap", num_json(a.cap));
    Ok(passed(report))
}

#[derive(Subcommand, Debug, Clone)]
pub enum OracleKind {
    /// y' + y = y^m, y(0) = b
    Bernoulli(BernoulliArgs),
    /// y' = y^m, y(0) = b
    PowerOde(PowerOdeArgs),
    /// Linear solution b t^(α-1) E_{α-β,α}(-t^(α-β))
    MlLinear(MlArgs),
    /// Upper end m* of the nonexistence range (1, m*]
    Threshold(ThresholdArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BernoulliArgs {
    #[arg(long, default_value_t = d::BERNOULLI_B)]
    pub b: f64,
    #[arg(long, default_value_t = d::M)]
    pub m: f64,
    /// Times at which to tabulate the solution
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct PowerOdeArgs {
    #[arg(long, default_value_t = d::B)]
    pub b: f64,
    #[arg(long, default_value_t = d::M)]
    pub m: f64,
    /// Times at which to tabulate the solution
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MlArgs {
    #[arg(long, default_value_t = d::ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = d::BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = d::B)]
    pub b: f64,
    #[arg(long, value_delimiter = ',', default_values_t = d::ML_T.to_vec())]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = d::GAMMA)]
    pub gamma: f64,
    /// Lower order β
    #[arg(long, default_value_t = d::SCAN_BETA)]
    pub beta: f64,
    /// Exponents to test for membership in (1, m*]
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<f64>,
}

fn classical(
    b: f64,
    m: f64,
    ts: &[f64],
    value: fn(f64, f64, f64) -> fracblow_core::Result<f64>,
    blowup: Option<f64>,
) -> Result<Outcome> {
    value(b, m, 0.0)?;
    let mut table = Table::new(&["t", "y"]);
    for &t in ts {
        table.push(vec![Cell::Num(t), Cell::Num(value(b, m, t)?)]);
    }
    let mut report = Report::new(table);
    report.set("blowup_time", opt_json(blowup));
    Ok(passed(report))
}

pub fn oracle(kind: &OracleKind) -> Result<Outcome> {
    match kind {
        OracleKind::Bernoulli(a) => {
            bernoulli(a.b, a.m, 0.0)?;
            let ts = (a.b > 1.0).then(|| bernoulli_blowup_time(a.b, a.m)).transpose()?;
            classical(a.b, a.m, &a.t, bernoulli, ts)
        }
        OracleKind::PowerOde(a) => {
            let ts = power_ode_blowup_time(a.b, a.m)?;
            classical(a.b, a.m, &a.t, power_ode, Some(ts))
        }
        OracleKind::MlLinear(a) => {
            let (alpha, beta) = (FracOrder::new(a.alpha)?, FracOrder::new(a.beta)?);
            let acc = SeriesAccuracy::default();
            let mut table = Table::new(&["t", "y"]);
            for &t in &a.t {
                table.push(vec![Cell::Num(t), Cell::Num(ml_linear(alpha, beta, a.b, t, acc)?)]);
            }
            Ok(passed(Report::new(table)))
        }
        OracleKind::Threshold(a) => {
            let th = threshold_m_star(ThresholdSpec::new(a.gamma, a.beta)?);
            let mut table = Table::new(&["m", "in_range"]);
            for &m in &a.m {
                if !m.is_finite() {
                    bail!(Invalid(format!("--m values must be finite, got {m}")));
                }
                table.push(vec![Cell::Num(m), Cell::Bool(th.contains(m))]);
            }
            let mut report = Report::new(table);
            let (ms, unbounded) = match th {
                Threshold::Finite(v) => (Some(v), false),
                Threshold::Unbounded => (None, true),
            };
            report.set("m_star", opt_json(ms));
            report.set("unbounded", Value::Bool(unbounded));
            Ok(passed(report))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = [1.0, 10.0, 100.0].iter().map(|&t: &f64| (t, 3.0 * t.powf(-0.5))).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }
}
