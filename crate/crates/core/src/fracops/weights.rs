//! Product-integration weights for `∫_0^{t_j} (t_j - s)^(μ-1) s^σ z(s) ds` on
//! a uniform grid, with `z` interpolated piecewise-linearly.
//!
//! In grid units (`u = s/h`) the weight of node `k` in row `j` is
//!
//! ```text
//! w[j,k] = ∫_{k-1}^{k} (j-u)^(μ-1) u^σ (u-k+1) du + ∫_k^{k+1} (j-u)^(μ-1) u^σ (k+1-u) du
//! ```
//!
//! and the physical integral is `h^(μ+σ) Σ_k w[j,k] z_k`. The weights are
//! independent of `h`.
//!
//! Two exact evaluations of the interval moments are used:
//!
//! * intervals next to the origin (`k < EXACT_INTERVALS`) go through the
//!   regularized incomplete beta function;
//! * all other intervals expand `(k+v)^σ = k^σ Σ_i C(σ,i) (v/k)^i`, which
//!   converges geometrically for `k ≥ EXACT_INTERVALS`, against tabulated
//!   polynomial moments `P_i(d) = ∫_0^1 (d-v)^(μ-1) v^i dv`. The expansion is
//!   finite (and used everywhere) when σ is a non-negative integer.

use super::quad::GaussLegendre;
use crate::math::{abs, is_integer, pow, powi};
use crate::specfun::{beta, ibeta_pair};
use alloc::vec;
use alloc::vec::Vec;

const EXACT_INTERVALS: usize = 16;
/// Relative size below which binomial terms are dropped.
const TERM_CUTOFF: f64 = 1e-18;
const MAX_TERMS: usize = 64;

#[derive(Debug, Clone)]
pub(crate) struct ProductWeights {
    mu: f64,
    sigma: f64,
    n: usize,
    /// First interval handled by the binomial expansion.
    first_series: usize,
    /// Stored moment orders per distance.
    stride: usize,
    /// `P_i(d)` at `(d - 1) * stride + i`.
    moments: Vec<f64>,
    /// `C(σ,i) k^(σ-i)` at `k * stride + i`, for `k >= first_series`.
    coef: Vec<f64>,
    terms: Vec<usize>,
    beta0: f64,
    beta1: f64,
}

impl ProductWeights {
    /// Needs `mu > 0`, `sigma > -1` and `n >= 1`.
    pub(crate) fn new(mu: f64, sigma: f64, n: usize) -> Self {
        debug_assert!(mu > 0.0 && sigma > -1.0 && n >= 1);
        let integer = is_integer(sigma) && sigma >= 0.0;
        let first_series = if integer { 0 } else { EXACT_INTERVALS.min(n) };

        let mut binom = Vec::with_capacity(MAX_TERMS);
        let mut c = 1.0;
        for i in 0..MAX_TERMS {
            binom.push(c);
            c *= (sigma - i as f64) / (i as f64 + 1.0);
        }

        let mut terms = vec![0usize; n];
        let mut max_terms = 1;
        for (k, slot) in terms.iter_mut().enumerate().skip(first_series) {
            let kf = k as f64;
            let mut count = MAX_TERMS;
            if integer {
                count = sigma as usize + 1;
            } else {
                let mut scale = 1.0;
                for (i, b) in binom.iter().enumerate() {
                    // terms decrease monotonically once i exceeds σ
                    if i as f64 > sigma && abs(*b) * scale < TERM_CUTOFF {
                        count = i;
                        break;
                    }
                    scale /= kf;
                }
            }
            *slot = count;
            max_terms = max_terms.max(count);
        }
        let stride = max_terms + 1;

        let mut coef = vec![0.0; n * stride];
        for k in first_series..n {
            let kf = k as f64;
            for i in 0..terms[k] {
                let e = sigma - i as f64;
                let pw = if integer { powi(kf, e as i32) } else { pow(kf, e) };
                coef[k * stride + i] = binom[i] * pw;
            }
        }

        let moments = polynomial_moments(mu, n, stride);
        Self {
            mu,
            sigma,
            n,
            first_series,
            stride,
            moments,
            coef,
            terms,
            beta0: beta(sigma + 1.0, mu),
            beta1: beta(sigma + 2.0, mu),
        }
    }

    /// Fills `out[0..=j]` with the weights of row `j` (`1 <= j <= n`).
    pub(crate) fn row(&self, j: usize, out: &mut Vec<f64>) {
        debug_assert!(j >= 1 && j <= self.n);
        out.clear();
        out.resize(j + 1, 0.0);
        let exact = self.first_series.min(j);
        if exact > 0 {
            self.exact_intervals(j, exact, out);
        }
        for k in exact..j {
            let d = j - k;
            let p = &self.moments[(d - 1) * self.stride..d * self.stride];
            let c = &self.coef[k * self.stride..k * self.stride + self.terms[k]];
            let mut left = 0.0;
            let mut right = 0.0;
            for (i, ci) in c.iter().enumerate() {
                left += ci * (p[i] - p[i + 1]);
                right += ci * p[i + 1];
            }
            out[k] += left;
            out[k + 1] += right;
        }
    }

    /// Moments over intervals `0..count` of row `j` from incomplete beta
    /// increments: `∫_k^{k+1} (j-u)^(μ-1) u^(σ+e) du = j^(μ+σ+e) B(σ+e+1, μ) ΔI`.
    fn exact_intervals(&self, j: usize, count: usize, out: &mut [f64]) {
        let jf = j as f64;
        let mut m = [[0.0; EXACT_INTERVALS]; 2];
        for (e, row) in m.iter_mut().enumerate() {
            let p = self.sigma + 1.0 + e as f64;
            let scale = pow(jf, self.mu + self.sigma + e as f64) * if e == 0 { self.beta0 } else { self.beta1 };
            let mut lo = ibeta_pair(0.0, 1.0, p, self.mu);
            for (k, slot) in row.iter_mut().enumerate().take(count) {
                let kf = (k + 1) as f64;
                let hi = ibeta_pair(kf / jf, (jf - kf) / jf, p, self.mu);
                let inc = if hi.0 <= 0.5 {
                    hi.0 - lo.0
                } else if lo.0 >= 0.5 {
                    lo.1 - hi.1
                } else {
                    (1.0 - hi.1) - lo.0
                };
                *slot = scale * inc;
                lo = hi;
            }
        }
        for k in 0..count {
            let kf = k as f64;
            out[k] += (kf + 1.0) * m[0][k] - m[1][k];
            out[k + 1] += m[1][k] - kf * m[0][k];
        }
    }

    /// `Σ_{k<=j} w[j,k] z_k`, using `buf` as scratch.
    pub(crate) fn apply(&self, j: usize, z: &[f64], buf: &mut Vec<f64>) -> f64 {
        self.row(j, buf);
        buf.iter().zip(z).map(|(w, z)| w * z).sum()
    }
}

/// `P_i(d) = ∫_0^1 (d-v)^(μ-1) v^i dv` for `d = 1..=n`, `i < stride`.
fn polynomial_moments(mu: f64, n: usize, stride: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * stride];
    // d = 1: P_i(1) = B(i+1, μ), via B(i+1, μ) = B(i, μ) i / (i + μ)
    let mut b = 1.0 / mu;
    for i in 0..stride {
        if i > 0 {
            b *= i as f64 / (i as f64 + mu);
        }
        out[i] = b;
    }
    if n == 1 {
        return out;
    }
    // (d - v)^(μ-1) is analytic on [0,1] for d >= 2; 32 points reach
    // round-off even at d = 2 and for the polynomial degrees stored here.
    let rule = GaussLegendre::new(32);
    let mut kernel = vec![0.0; rule.nodes.len()];
    for d in 2..=n {
        let df = d as f64;
        for (kv, (v, w)) in kernel.iter_mut().zip(rule.nodes.iter().zip(&rule.weights)) {
            *kv = w * pow(df - v, mu - 1.0);
        }
        let row = &mut out[(d - 1) * stride..d * stride];
        for (kv, v) in kernel.iter_mut().zip(&rule.nodes) {
            for slot in row.iter_mut() {
                *slot += *kv;
                *kv *= v;
            }
        }
    }
    out
}

/// Kernel moments `∫_0^1 (d-v)^(μ-1) {1, v} dv` for `d = 1, 2, ...`, grown on
/// demand. They give the σ = 0 weights of any row, since those depend only on
/// the distance `d = n - k`.
#[derive(Debug, Clone)]
pub(crate) struct KernelMoments {
    mu: f64,
    rule: GaussLegendre,
    p0: Vec<f64>,
    p1: Vec<f64>,
}

impl KernelMoments {
    pub(crate) fn new(mu: f64) -> Self {
        Self {
            mu,
            rule: GaussLegendre::new(16),
            p0: vec![1.0 / mu],
            p1: vec![1.0 / (mu * (1.0 + mu))],
        }
    }

    pub(crate) fn mu(&self) -> f64 {
        self.mu
    }

    /// Moments at distance `d >= 1`.
    pub(crate) fn get(&mut self, d: usize) -> (f64, f64) {
        while self.p0.len() < d {
            let df = (self.p0.len() + 1) as f64;
            let mut p0 = 0.0;
            let mut p1 = 0.0;
            for (v, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let kv = wt * pow(df - v, self.mu - 1.0);
                p0 += kv;
                p1 += kv * v;
            }
            self.p0.push(p0);
            self.p1.push(p1);
        }
        (self.p0[d - 1], self.p1[d - 1])
    }
}

/// Row-`n` weights for σ = 0 without tabulating all rows: `w[k]` multiplies
/// `z_k` in `∫_0^{n} (n-u)^(μ-1) z(u) du`.
#[cfg(test)]
pub(crate) fn plain_last_row(mu: f64, n: usize) -> Vec<f64> {
    let mut moments = KernelMoments::new(mu);
    let mut w = vec![0.0; n + 1];
    for k in 0..n {
        let (p0, p1) = moments.get(n - k);
        w[k] += p0 - p1;
        w[k + 1] += p1;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::quad::{adaptive, Tolerance};
    use std::vec::Vec;

    /// Brute-force weight oracle: adaptive quadrature of the hat-function moments.
    /// Each interval is split at its midpoint; the right half is integrated in
    /// `w = j - u` so the kernel singularity stays resolvable in floating point.
    fn oracle_row(mu: f64, sigma: f64, j: usize) -> Vec<f64> {
        let jf = j as f64;
        let mut w = vec![0.0; j + 1];
        let tol = Tolerance::Absolute(1e-14);
        for k in 0..j {
            let kf = k as f64;
            let g = |u: f64, dist: f64| dist.powf(mu - 1.0) * u.powf(sigma);
            let mid = kf + 0.5;
            let (d_lo, d_hi) = (jf - kf - 1.0, jf - kf - 0.5);
            let l = adaptive(|u| g(u, jf - u) * (kf + 1.0 - u), kf, mid, tol, 20_000).unwrap().0
                + adaptive(|d| g(jf - d, d) * (d - d_lo), d_lo, d_hi, tol, 20_000).unwrap().0;
            let r = adaptive(|u| g(u, jf - u) * (u - kf), kf, mid, tol, 20_000).unwrap().0
                + adaptive(|d| g(jf - d, d) * (1.0 - (d - d_lo)), d_lo, d_hi, tol, 20_000).unwrap().0;
            w[k] += l;
            w[k + 1] += r;
        }
        w
    }

    #[test]
    fn weights_match_brute_force_quadrature() {
        for &(mu, sigma) in &[(0.5, 0.0), (0.45, -0.1), (0.9, -0.5), (0.3, 0.7), (1.0, -0.3), (0.6, 2.5)] {
            let plan = ProductWeights::new(mu, sigma, 40);
            let mut row = Vec::new();
            for j in [1usize, 2, 5, 17, 40] {
                plan.row(j, &mut row);
                let want = oracle_row(mu, sigma, j);
                for k in 0..=j {
                    let scale = want[k].abs().max(1e-3);
                    assert!(
                        (row[k] - want[k]).abs() < 2e-9 * scale.max(1.0),
                        "mu={mu} sigma={sigma} j={j} k={k}: {} vs {}",
                        row[k],
                        want[k]
                    );
                }
            }
        }
    }

    #[test]
    fn weights_integrate_linear_functions_exactly() {
        // Σ w[j,k] (a + b k) = ∫_0^j (j-u)^(μ-1) u^σ (a + b u) du
        let (mu, sigma) = (0.45, -0.1);
        let plan = ProductWeights::new(mu, sigma, 300);
        let mut row = Vec::new();
        for j in [1usize, 7, 16, 17, 100, 300] {
            plan.row(j, &mut row);
            let jf = j as f64;
            let s0: f64 = row.iter().sum();
            let s1: f64 = row.iter().enumerate().map(|(k, w)| w * k as f64).sum();
            let e0 = jf.powf(mu + sigma) * beta(sigma + 1.0, mu);
            let e1 = jf.powf(mu + sigma + 1.0) * beta(sigma + 2.0, mu);
            assert!((s0 - e0).abs() < 1e-12 * e0, "j={j}");
            assert!((s1 - e1).abs() < 1e-12 * e1, "j={j}");
        }
    }

    #[test]
    fn plain_row_matches_plan() {
        let plan = ProductWeights::new(0.35, 0.0, 64);
        let mut row = Vec::new();
        plan.row(64, &mut row);
        let plain = plain_last_row(0.35, 64);
        for (a, b) in row.iter().zip(&plain) {
            assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
        }
    }
}
