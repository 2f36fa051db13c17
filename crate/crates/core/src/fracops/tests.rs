use super::*;
use crate::specfun::gamma;
use std::vec;
use std::vec::Vec;

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn ord(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn max_rel_err(got: &SingularGridFunction, exact: impl Fn(f64) -> f64, t_min: f64) -> f64 {
    (1..=got.n())
        .filter(|&j| got.t(j) >= t_min)
        .map(|j| {
            let e = exact(got.t(j));
            (got.value(j) - e).abs() / e.abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn power_rule_examples() {
    let v = rl_power_rule(OperatorKind::Integral, ord(0.5), 0.0, 1.0).unwrap();
    assert!((v - 1.128_379_167_095_512_6).abs() < 1e-14);
    for a in [0.2, 0.5, 0.9] {
        assert_eq!(rl_power_rule(OperatorKind::Derivative, ord(a), a - 1.0, 0.7).unwrap(), 0.0);
    }
    for mu in [-0.5, 0.0, 1.3] {
        let v = rl_power_rule(OperatorKind::Integral, ord(0.0), mu, 2.0).unwrap();
        assert!((v - 2f64.powf(mu)).abs() < 1e-15);
    }
    assert!(rl_power_rule(OperatorKind::Integral, ord(0.5), -1.0, 1.0).is_err());
    assert!(rl_power_rule(OperatorKind::Derivative, ord(0.7), -0.5, 1.0).is_err());
}

/// `∫_0^t (t-s)^(a-1) s^mu ds` by adaptive quadrature, with the half next to
/// `t` integrated in `d = t - s` so the kernel singularity stays resolvable.
fn kernel_quadrature(a: f64, mu: f64, t: f64) -> f64 {
    let tol = quad::Tolerance::Absolute(1e-13);
    let lo = quad::adaptive(|s: f64| (t - s).powf(a - 1.0) * s.powf(mu), 0.0, t / 2.0, tol, 5000).unwrap().0;
    let hi = quad::adaptive(|d: f64| d.powf(a - 1.0) * (t - d).powf(mu), 0.0, t / 2.0, tol, 5000).unwrap().0;
    lo + hi
}

#[test]
fn power_rule_integral_matches_quadrature() {
    for (a, mu, t) in [(0.5, 0.0, 1.0), (0.3, 1.5, 2.0), (0.8, -0.4, 0.5)] {
        let want = kernel_quadrature(a, mu, t) / gamma(a);
        let got = rl_power_rule(OperatorKind::Integral, ord(a), mu, t).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "a={a} mu={mu}: {got} vs {want}");
    }
}

#[test]
fn running_integral_of_one_is_t() {
    let f = SingularGridFunction::sample(1.0, 64, 0.0, |_| 1.0).unwrap();
    let g = rl_left_integral_grid(ord(1.0), &f).unwrap();
    for j in 0..=64 {
        assert!((g.value(j) - g.t(j)).abs() < 1e-12);
    }
}

#[test]
fn half_integral_of_inverse_sqrt_is_constant() {
    let f = SingularGridFunction::sample(1.0, 2048, -0.5, |_| 1.0).unwrap();
    let g = rl_left_integral_grid(ord(0.5), &f).unwrap();
    assert_eq!(g.sigma(), 0.0);
    for j in 0..=2048 {
        assert!((g.value(j) - SQRT_PI).abs() < 1e-6, "j={j}: {}", g.value(j));
    }
}

#[test]
fn half_integral_of_t() {
    let f = SingularGridFunction::sample(1.0, 2048, 0.0, |t| t).unwrap();
    let g = rl_left_integral_grid(ord(0.5), &f).unwrap();
    let c = gamma(2.0) / gamma(2.5);
    assert!(max_rel_err(&g, |t| c * t.powf(1.5), 0.0) < 1e-6);
    assert_eq!(g.value(0), 0.0);
}

#[test]
fn singular_output_keeps_exponent() {
    // I^0.3 t^-0.6 = Γ(0.4)/Γ(0.7) t^-0.3
    let f = SingularGridFunction::sample(1.0, 256, -0.6, |_| 1.0).unwrap();
    let g = rl_left_integral_grid(ord(0.3), &f).unwrap();
    assert!((g.sigma() + 0.3).abs() < 1e-15);
    let c = gamma(0.4) / gamma(0.7);
    for &z in g.z() {
        assert!((z - c).abs() < 1e-11 * c);
    }
    assert!(g.value(0).is_infinite());
}

#[test]
fn derivative_examples() {
    let n = 2048;
    for a in [0.3, 0.5, 0.8] {
        let f = SingularGridFunction::sample(1.0, n, a - 1.0, |_| 1.0).unwrap();
        let d = rl_left_derivative_grid(ord(a), &f).unwrap();
        for j in 1..n {
            assert!(d.value(j).abs() < 1e-6, "a={a} j={j}: {}", d.value(j));
        }
    }

    let f = SingularGridFunction::sample(1.0, n, 0.0, |t| t).unwrap();
    let d = rl_left_derivative_grid(ord(0.5), &f).unwrap();
    let c = gamma(2.0) / gamma(1.5);
    assert!(max_rel_err(&d, |t| c * t.sqrt(), 0.1) < 1e-4);
    assert_eq!(d.value(0), 0.0);

    let f = SingularGridFunction::sample(1.0, n, 0.0, |_| 1.0).unwrap();
    let d = rl_left_derivative_grid(ord(0.5), &f).unwrap();
    assert!(max_rel_err(&d, |t| t.powf(-0.5) / gamma(0.5), 0.1) < 1e-4);
    assert!(d.value(0).is_infinite());
    let lead = d.endpoint().unwrap();
    assert_eq!(lead.exponent, -0.5);
    assert!((lead.coefficient - 1.0 / SQRT_PI).abs() < 1e-14);
}

#[test]
fn derivative_rejects_bad_input() {
    let f = SingularGridFunction::sample(1.0, 16, -0.8, |_| 1.0).unwrap();
    assert!(rl_left_derivative_grid(ord(0.5), &f).is_err());
    let g = SingularGridFunction::sample(1.0, 16, 0.0, |_| 1.0).unwrap();
    assert!(rl_left_derivative_grid(ord(1.0), &g).is_err());
    assert!(rl_left_derivative_grid(ord(0.0), &g).is_err());
    assert!(rl_left_integral_grid(ord(0.0), &g).is_err());
    assert!(SingularGridFunction::new(0.1, -1.0, vec![1.0, 1.0]).is_err());
    assert!(SingularGridFunction::new(0.1, 0.0, vec![1.0]).is_err());
    assert!(FracOrder::new(1.2).is_err());
}

#[test]
fn right_integral_examples() {
    let budget = QuadratureBudget::default();
    let v = rl_right_integral_at(ord(1.0), |_| 1.0, 0.0, 1.0, budget).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
    let v = rl_right_integral_at(ord(0.5), |_| 1.0, 0.0, 1.0, budget).unwrap();
    assert!((v - 2.0 / SQRT_PI).abs() < 1e-8);
    let v = rl_right_integral_at(ord(0.5), |s| 1.0 - s, 0.0, 1.0, budget).unwrap();
    assert!((v - 0.752_252_778_063_675_2).abs() < 1e-8);
    // non-polynomial integrand against plain adaptive quadrature
    let want = {
        let f = |s: f64| s.powf(-0.5) * s.exp();
        quad::adaptive(f, 0.0, 1.0, quad::Tolerance::Relative(1e-13), 5000).unwrap().0 / SQRT_PI
    };
    let v = rl_right_integral_at(ord(0.5), |s| s.exp(), 0.0, 1.0, budget).unwrap();
    assert!((v - want).abs() < 1e-8, "{v} vs {want}");
}

#[test]
fn right_integral_budget_exhaustion() {
    let budget = QuadratureBudget::new(1e-15, 1).unwrap();
    let r = rl_right_integral_at(ord(0.5), |s| (10.0 * s).sin(), 0.0, 1.0, budget);
    match r {
        Err(Error::Accuracy { best, .. }) => assert!(best.is_finite()),
        other => panic!("expected accuracy error, got {other:?}"),
    }
    assert!(rl_right_integral_at(ord(0.5), |_| 1.0, 1.0, 1.0, QuadratureBudget::default()).is_err());
}

#[test]
fn ibp_examples() {
    let budget = QuadratureBudget::default();
    let one = SingularGridFunction::sample(1.0, 2048, 0.0, |_| 1.0).unwrap();
    let (l, r) = ibp_check(ord(0.5), &one, &one, budget).unwrap();
    let want = (2.0 / 3.0) / gamma(1.5);
    assert!((l - want).abs() < 1e-6 && (r - want).abs() < 1e-6, "{l} {r} {want}");
    assert!((l - r).abs() < 1e-12);

    let phi = SingularGridFunction::sample(1.0, 2048, 0.0, |t| 1.0 - t).unwrap();
    let psi = SingularGridFunction::sample(1.0, 2048, 0.0, |t| t).unwrap();
    let (l, r) = ibp_check(ord(0.5), &phi, &psi, budget).unwrap();
    assert!((l - r).abs() < 1e-6);

    let other = SingularGridFunction::sample(1.0, 1024, 0.0, |t| t).unwrap();
    assert!(ibp_check(ord(0.5), &phi, &other, budget).is_err());
}

#[test]
fn ibp_discrepancy_shrinks_with_h() {
    let budget = QuadratureBudget::default();
    let mut prev = f64::NAN;
    for n in [128usize, 256, 512, 1024] {
        let phi = SingularGridFunction::sample(1.0, n, 0.0, |t| 1.0 + t * t).unwrap();
        let psi = SingularGridFunction::sample(1.0, n, 0.0, |t| t.exp()).unwrap();
        let (l, r) = ibp_check(ord(0.4), &phi, &psi, budget).unwrap();
        let gap = (l - r).abs();
        if prev.is_finite() {
            assert!(gap <= prev / 1.8, "n={n}: {gap} vs {prev}");
        }
        prev = gap;
    }
}

/// Error of the grid integral of `t^mu` (sampled with exponent `sigma`) against
/// the power rule, relative to the largest exact value.
fn power_rule_error(a: f64, mu: f64, sigma: f64, n: usize) -> f64 {
    let f = SingularGridFunction::sample(1.0, n, sigma, |t| t.powf(mu - sigma)).unwrap();
    let g = rl_left_integral_grid(ord(a), &f).unwrap();
    let exact = |t: f64| rl_power_rule(OperatorKind::Integral, ord(a), mu, t).unwrap();
    let scale = (1..=n).map(|j| exact(g.t(j)).abs()).fold(0.0, f64::max);
    (1..=n).map(|j| (g.value(j) - exact(g.t(j))).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn power_rule_consistency() {
    for a in [0.3, 0.5, 0.7] {
        for mu in [-0.5, 0.0, 1.0, 2.5] {
            let f = SingularGridFunction::sample(1.0, 2048, mu, |_| 1.0).unwrap();
            let g = rl_left_integral_grid(ord(a), &f).unwrap();
            let exact = |t: f64| rl_power_rule(OperatorKind::Integral, ord(a), mu, t).unwrap();
            let e = max_rel_err(&g, exact, 0.0);
            assert!(e <= 1e-5, "a={a} mu={mu}: {e}");
            // smooth part sampled without the weight
            if mu >= 0.0 {
                let e = power_rule_error(a, mu, 0.0, 2048);
                assert!(e <= 1e-5, "a={a} mu={mu} unweighted: {e}");
            }
        }
    }
}

#[test]
fn product_integration_is_second_order() {
    for a in [0.3, 0.5, 0.7] {
        for (mu, sigma) in [(2.5, 0.0), (2.5, -0.5), (1.5, -0.5), (3.0, 0.0)] {
            let coarse = power_rule_error(a, mu, sigma, 1024);
            let fine = power_rule_error(a, mu, sigma, 2048);
            assert!(coarse / fine >= 3.0, "a={a} mu={mu} sigma={sigma}: {coarse} -> {fine}");
        }
    }
}

#[test]
fn semigroup_on_power_functions() {
    for (a, b) in [(0.3, 0.4), (0.5, 0.5)] {
        for mu in [0.0, 1.0, -0.5, 2.5] {
            let f = SingularGridFunction::sample(1.0, 2048, mu, |_| 1.0).unwrap();
            let inner = rl_left_integral_grid(ord(b), &f).unwrap();
            let outer = rl_left_integral_grid(ord(a), &inner).unwrap();
            let exact = |t: f64| rl_power_rule(OperatorKind::Integral, ord(a + b), mu, t).unwrap();
            let e = max_rel_err(&outer, exact, 0.0);
            assert!(e <= 1e-4, "a={a} b={b} mu={mu}: {e}");
        }
    }
}

#[test]
fn derivative_is_left_inverse_of_integral() {
    for a in [0.3, 0.5, 0.7] {
        for (k, f) in [(0, (|_| 1.0) as fn(f64) -> f64), (1, |t| t)] {
            let g = SingularGridFunction::sample(1.0, 2048, 0.0, f).unwrap();
            let ig = rl_left_integral_grid(ord(a), &g).unwrap();
            let back = rl_left_derivative_grid(ord(a), &ig).unwrap();
            let e = max_rel_err(&back, f, 0.1);
            assert!(e <= 1e-3, "a={a} f=t^{k}: {e}");
        }
    }
}

/// Least-squares slope of log|v| against log t.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.abs().ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(nu, de), (x, y)| {
        let dx = x.ln() - mx;
        (nu + dx * (y.abs().ln() - my), de + dx * dx)
    });
    num / den
}

#[test]
fn fractional_integral_vanishes_at_origin() {
    for (a, b) in [(0.9, 0.45), (0.7, 0.3)] {
        let y = SingularGridFunction::sample(1.0, 2048, a - 1.0, |t| (2.0 * t).cos() + 0.5).unwrap();
        let iy = rl_left_integral_grid(ord(1.0 - b), &y).unwrap();
        assert_eq!(iy.value(0), 0.0);
        let pts: Vec<_> = (1..=10).map(|j| (iy.t(j), iy.value(j))).collect();
        let slope = log_log_slope(&pts);
        assert!((slope - (a - b)).abs() < 0.05, "a={a} b={b}: slope {slope}");
    }
}
