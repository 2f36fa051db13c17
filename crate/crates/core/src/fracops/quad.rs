//! Gauss-Legendre rules and a globally adaptive integrator built on them.

use crate::error::{Error, Result};
use crate::math::{abs, cos, PI};
use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Nodes and weights of an n-point Gauss-Legendre rule on [0, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if abs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        let mut s = 0.0;
        for (&x, w) in self.nodes.iter().zip(&self.weights) {
            // anchor each node at its nearer end so it never rounds outside [a, b]
            let t = if x <= 0.5 { a + len * x } else { b - len * (1.0 - x) };
            s += w * f(t);
        }
        s * len
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// How an error estimate is compared against a tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// Error relative to the magnitude of the current estimate. Refinement
    /// decisions are then invariant under rescaling of the integrand.
    Relative(f64),
}

impl Tolerance {
    pub(crate) fn accepts(self, err: f64, value: f64) -> bool {
        match self {
            Tolerance::Absolute(tol) => err <= tol,
            Tolerance::Relative(tol) => err <= tol * abs(value) || err == 0.0,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Legendre quadrature of `f` over `[a, b]`.
///
/// Each panel is estimated with the rule on the whole panel and on its two
/// halves; the panel with the largest discrepancy is split next. Returns the
/// value and the summed error estimate.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<(f64, f64)> {
    let rule = GaussLegendre::new(10);
    let eval = |a: f64, b: f64, f: &mut F| -> Panel {
        let whole = rule.integrate(a, b, &mut *f);
        let mid = 0.5 * (a + b);
        let halves = rule.integrate(a, mid, &mut *f) + rule.integrate(mid, b, &mut *f);
        Panel { a, b, value: halves, err: abs(whole - halves) }
    };
    let mut heap = BinaryHeap::new();
    heap.push(eval(a, b, &mut f));
    loop {
        let (value, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        if tol.accepts(err, value) {
            return Ok((value, err));
        }
        if heap.len() >= max_panels {
            return Err(Error::Accuracy {
                what: format!("adaptive quadrature exhausted {max_panels} panels"),
                best: value,
                err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(eval(worst.a, mid, &mut f));
        heap.push(eval(mid, worst.b, &mut f));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-15);
        for k in 0..16 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
        let rule = GaussLegendre::new(32);
        let got = rule.integrate(0.0, 2.0, |x| x.exp());
        assert!((got - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = adaptive(|x| x.sqrt(), 0.0, 1.0, Tolerance::Absolute(1e-12), 500).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let (v, _) = adaptive(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::Relative(1e-9), 2000).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_reports_exhaustion() {
        let r = adaptive(|x| x.powf(-0.9), 0.0, 1.0, Tolerance::Absolute(1e-14), 4);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
