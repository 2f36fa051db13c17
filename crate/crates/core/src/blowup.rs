//! Blow-up classification, blow-up time extrapolation and parameter scans.
//!
//! A scan reports what the solver observed next to the analytic
//! nonexistence range; the two are never mixed.

use crate::error::{ensure, Result};
use crate::math::{abs, exp, ln, sqrt};
use crate::oracles::{threshold_m_star, ThresholdSpec};
use crate::solver::{solve, EscapeReason, ProblemSpec, Status, Trajectory};
use alloc::vec::Vec;

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Blowup => "blowup",
            Status::Stagnated => "stagnated",
        }
    }
}

/// Observed outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupReport {
    pub status: Status,
    pub t_escape: Option<f64>,
    pub escape_reason: Option<EscapeReason>,
    pub t_star_estimate: Option<f64>,
    pub fit_quality: Option<f64>,
}

impl BlowupReport {
    fn stagnated() -> Self {
        Self { status: Status::Stagnated, t_escape: None, escape_reason: None, t_star_estimate: None, fit_quality: None }
    }
}

/// Classifies a trajectory against `cap`. A trajectory computed with a
/// larger cap is cut at its first node with `|y| > cap`.
pub fn detect(traj: &Trajectory, cap: f64) -> BlowupReport {
    let mut report = BlowupReport {
        status: traj.status,
        t_escape: traj.t_escape,
        escape_reason: traj.escape_reason,
        t_star_estimate: None,
        fit_quality: None,
    };
    if traj.status == Status::Stagnated {
        return report;
    }
    let g = &traj.grid;
    if let Some(j) = (1..=g.n()).find(|&j| abs(g.value(j)) > cap) {
        let t = g.t(j);
        if report.t_escape.is_none_or(|te| t < te) {
            report.status = Status::Blowup;
            report.t_escape = Some(t);
            report.escape_reason = Some(EscapeReason::CapExceeded);
        }
    }
    report
}

/// Least-squares fit of `ln|y| = c + s ln(t* - t)` for fixed `t*`; returns
/// the residual sum of squares.
fn fit_residual(tail: &[(f64, f64)], t_star: f64) -> f64 {
    let n = tail.len() as f64;
    let xs = tail.iter().map(|&(t, _)| ln(t_star - t));
    let (sx, sy) = xs.clone().zip(tail).fold((0.0, 0.0), |(a, b), (x, &(_, y))| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, &(_, y)) in xs.zip(tail) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return syy;
    }
    (syy - sxy * sxy / sxx).max(0.0)
}

/// Extrapolates the blow-up time from the tail of a blown-up trajectory.
///
/// The tail is the last 20 finite nodes with `0 < |y| <= √cap` (at least 8).
/// `ln|y|` is fitted against `ln(t* - t)` with free slope and intercept, and
/// `t*` is chosen by a logarithmic scan of `t* - t_last` followed by
/// golden-section refinement. Returns `t*` and the `R²` of the fit.
pub fn estimate_blowup_time(traj: &Trajectory, m: f64) -> Result<(f64, f64)> {
    const TAIL: usize = 20;
    const MIN_TAIL: usize = 8;
    ensure!(m > 1.0, "blow-up exponent m must exceed 1, got {m}");
    ensure!(traj.status == Status::Blowup, "blow-up time needs a trajectory that blew up");
    let g = &traj.grid;
    let limit = sqrt(traj.cap);
    let mut tail: Vec<(f64, f64)> = (1..=g.n())
        .rev()
        .map(|j| (g.t(j), g.value(j)))
        .filter(|&(_, y)| y.is_finite() && y != 0.0 && abs(y) <= limit)
        .take(TAIL)
        .map(|(t, y)| (t, ln(abs(y))))
        .collect();
    ensure!(
        tail.len() >= MIN_TAIL,
        "blow-up fit needs at least {MIN_TAIL} tail nodes below √cap, found {}",
        tail.len()
    );
    tail.reverse();

    let h = g.h();
    let t_last = tail[tail.len() - 1].0;
    let lo_t = traj.t_escape.map_or(t_last, |te| te - h).max(t_last);
    let hi_t = (1.1 * traj.horizon()).max(lo_t + 10.0 * h);
    // search in s = ln(t* - t_last)
    let s_lo = ln((lo_t - t_last).max(1e-3 * h));
    let s_hi = ln(hi_t - t_last);
    let cost = |s: f64| fit_residual(&tail, t_last + exp(s));
    const SCAN: usize = 400;
    let step = (s_hi - s_lo) / SCAN as f64;
    let (mut best_i, mut best_c) = (0, f64::INFINITY);
    for i in 0..=SCAN {
        let c = cost(s_lo + i as f64 * step);
        if c < best_c {
            best_c = c;
            best_i = i;
        }
    }
    let mut a = s_lo + best_i.saturating_sub(1) as f64 * step;
    let mut b = (s_lo + (best_i + 1) as f64 * step).min(s_hi);
    let gr = 0.5 * (sqrt(5.0) - 1.0);
    let (mut c, mut d) = (b - gr * (b - a), a + gr * (b - a));
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = cost(d);
        }
    }
    let (s_best, ss) = [(c, fc), (d, fd), (s_lo + best_i as f64 * step, best_c)]
        .into_iter()
        .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let t_star = t_last + exp(s_best);
    let my = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    let sst: f64 = tail.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let r2 = if sst > 0.0 { (1.0 - ss / sst).max(0.0) } else { 0.0 };
    Ok((t_star, r2))
}

/// One cell of a parameter scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub gamma: f64,
    pub m: f64,
    pub in_theorem_range: bool,
    pub report: BlowupReport,
}

/// Whether `(γ, m)` lies in the proven nonexistence range for orders
/// `α >= β`: `γ > -1, m > 1` when `α = β = 1`, otherwise `γ > -β` and
/// `1 < m <= (γ+1)/(1-β)`.
pub fn in_theorem_range(alpha: f64, beta: f64, gamma: f64, m: f64) -> bool {
    if alpha == 1.0 && beta == 1.0 {
        return gamma > -1.0 && m > 1.0;
    }
    if !(gamma > -beta) {
        return false;
    }
    match ThresholdSpec::new(gamma, beta) {
        Ok(th) => threshold_m_star(th).contains(m),
        Err(_) => false,
    }
}

/// Parameters shared by every cell of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSetup {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub horizon: f64,
    pub n: usize,
    pub cap: f64,
}

impl ScanSetup {
    pub fn new(alpha: f64, beta: f64, b: f64, horizon: f64, n: usize, cap: f64) -> Result<Self> {
        ProblemSpec::power(alpha, beta, 0.0, 2.0, b)?;
        ensure!(horizon > 0.0 && horizon.is_finite(), "horizon must be positive, got {horizon}");
        ensure!(n >= 16, "scan needs n >= 16, got {n}");
        ensure!(cap > b, "blow-up cap must exceed b (cap={cap}, b={b})");
        Ok(Self { alpha, beta, b, horizon, n, cap })
    }
}

/// Solves and classifies one `(γ, m)` cell. Failures of any kind are
/// reported as stagnated.
pub fn scan_cell(setup: &ScanSetup, gamma: f64, m: f64) -> ScanCell {
    let flag = in_theorem_range(setup.alpha, setup.beta, gamma, m);
    let report = ProblemSpec::power(setup.alpha, setup.beta, gamma, m, setup.b)
        .and_then(|spec| solve(&spec, setup.horizon, setup.n, setup.cap))
        .map(|traj| {
            let mut r = detect(&traj, setup.cap);
            if r.status == Status::Blowup {
                if let Ok((ts, q)) = estimate_blowup_time(&traj, m) {
                    r.t_star_estimate = Some(ts);
                    r.fit_quality = Some(q);
                }
            }
            r
        })
        .unwrap_or_else(|_| BlowupReport::stagnated());
    ScanCell { gamma, m, in_theorem_range: flag, report }
}

/// `(γ, m)` pairs of a scan in output order: row-major in γ, then m.
pub fn scan_order(gamma_grid: &[f64], m_grid: &[f64]) -> Vec<(f64, f64)> {
    gamma_grid.iter().flat_map(|&g| m_grid.iter().map(move |&m| (g, m))).collect()
}

/// Grid preconditions of [`scan`].
pub fn check_grids(gamma_grid: &[f64], m_grid: &[f64]) -> Result<()> {
    ensure!(!gamma_grid.is_empty() && !m_grid.is_empty(), "scan grids must be nonempty");
    ensure!(gamma_grid.iter().all(|g| g.is_finite()), "scan γ values must be finite");
    ensure!(m_grid.iter().all(|&m| m > 1.0 && m.is_finite()), "every m in a scan must exceed 1");
    Ok(())
}

/// Sequential scan over `gamma_grid × m_grid`.
pub fn scan(setup: &ScanSetup, gamma_grid: &[f64], m_grid: &[f64]) -> Result<Vec<ScanCell>> {
    check_grids(gamma_grid, m_grid)?;
    Ok(scan_order(gamma_grid, m_grid).into_iter().map(|(g, m)| scan_cell(setup, g, m)).collect())
}
