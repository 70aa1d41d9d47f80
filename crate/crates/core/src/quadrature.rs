//! Gauss–Legendre rules and exact integration of `poly(x) * exp(a x)`.
//!
//! For constant coefficients every weighted element integral has that form, so
//! assembly can evaluate them in closed form instead of by quadrature.

use std::sync::OnceLock;

use crate::problem::WeightFunction;
use crate::{Error, Result};

pub const MAX_GAUSS_POINTS: usize = 64;

/// Gauss–Legendre abscissae and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        GaussRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Approximates `∫_a^b g(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, g: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (&p, &w) in self.points.iter().zip(&self.weights) {
            sum += w * g(mid + half * p);
        }
        sum * half
    }
}

/// Returns `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static RULES: [OnceLock<GaussRule>; MAX_GAUSS_POINTS] = [const { OnceLock::new() }; MAX_GAUSS_POINTS];

/// The `n`-point Gauss–Legendre rule, `1 <= n <= 64`. Rules are computed once
/// and cached.
pub fn gauss_rule(n: usize) -> Result<&'static GaussRule> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::UnsupportedOrder(n));
    }
    Ok(RULES[n - 1].get_or_init(|| GaussRule::compute(n)))
}

/// Gauss approximation of `∫_{x0}^{x1} α(x) g(x) dx`.
pub fn integrate_weighted<G: Fn(f64) -> f64>(
    g: G,
    w: &WeightFunction,
    x0: f64,
    x1: f64,
    n_pts: usize,
) -> Result<f64> {
    let rule = gauss_rule(n_pts)?;
    Ok(rule.integrate(x0, x1, |x| w.alpha_at(x) * g(x)))
}

/// Point count used for variable-coefficient element integrals.
pub fn points_for_peclet(peclet: f64) -> usize {
    let p = peclet.abs().ceil();
    if !p.is_finite() {
        return 32;
    }
    (4.0 + p).clamp(4.0, 32.0) as usize
}

/// `∫_0^1 s^m e^{z s} ds`, switching between a power series (small `|z|`)
/// and upward recurrence (large `|z|`).
pub fn exp_moment(m: usize, z: f64) -> f64 {
    if z.abs() < series_threshold(m) {
        exp_moment_series(m, z)
    } else {
        exp_moment_recurrence(m, z)
    }
}

/// Upward recurrence loses accuracy as `m / |z|` per step, so below this
/// magnitude the series is used instead.
pub(crate) fn series_threshold(m: usize) -> f64 {
    (m as f64).max(2.0)
}

/// `Σ_k z^k / (k! (m + k + 1))`, convergent for every `z`.
pub(crate) fn exp_moment_series(m: usize, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0 / (m as f64 + 1.0);
    for k in 1..400 {
        term *= z / k as f64;
        let contrib = term / (m + k + 1) as f64;
        sum += contrib;
        if (k as f64) > z.abs() && contrib.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `φ_0 = expm1(z)/z`, `φ_m = (e^z - m φ_{m-1}) / z`.
pub(crate) fn exp_moment_recurrence(m: usize, z: f64) -> f64 {
    let ez = z.exp();
    let mut phi = z.exp_m1() / z;
    for j in 1..=m {
        phi = (ez - j as f64 * phi) / z;
    }
    phi
}

/// `∫_0^len q(t) e^{a t} dt` for `q(t) = Σ q_m t^m`.
pub fn integrate_exp_poly_local(a: f64, poly: &[f64], len: f64) -> f64 {
    if len == 0.0 {
        return 0.0;
    }
    let z = a * len;
    let mut scale = len;
    let mut sum = 0.0;
    for (m, &c) in poly.iter().enumerate() {
        if c != 0.0 {
            sum += c * scale * exp_moment(m, z);
        }
        scale *= len;
    }
    sum
}

/// `∫_{x0}^{x1} poly(x) e^{a x} dx` with `poly = [c0, c1, ...]` in powers of `x`.
///
/// The integral is evaluated in the shifted variable `t = x - x0` and the
/// factor `e^{a x0}` is applied last.
pub fn integrate_exp_poly(a: f64, poly: &[f64], x0: f64, x1: f64) -> f64 {
    debug_assert!(x0 <= x1, "integrate_exp_poly requires x0 <= x1");
    let shifted = taylor_shift(poly, x0);
    let local = integrate_exp_poly_local(a, &shifted, x1 - x0);
    if a == 0.0 {
        local
    } else {
        (a * x0).exp() * local
    }
}

/// Coefficients of `p(x0 + t)` in powers of `t`.
pub fn taylor_shift(poly: &[f64], x0: f64) -> Vec<f64> {
    let mut c = poly.to_vec();
    if x0 == 0.0 {
        return c;
    }
    let n = c.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            c[j] += x0 * c[j + 1];
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn low_order_rules() {
        let r1 = gauss_rule(1).unwrap();
        assert_eq!(r1.points, vec![0.0]);
        assert_eq!(r1.weights, vec![2.0]);

        let r2 = gauss_rule(2).unwrap();
        let p = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r2.points[0], -p, epsilon = 1e-16);
        assert_relative_eq!(r2.points[1], p, epsilon = 1e-16);
        assert_relative_eq!(r2.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r2.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unsupported_orders() {
        assert_eq!(gauss_rule(0), Err(Error::UnsupportedOrder(0)));
        assert_eq!(gauss_rule(65), Err(Error::UnsupportedOrder(65)));
    }

    #[test]
    fn weights_sum_and_exactness() {
        for n in 1..=MAX_GAUSS_POINTS {
            let rule = gauss_rule(n).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() <= 1e-14, "n={n} sum={s}");
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for deg in 0..(2 * n).min(40) {
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() <= 1e-13, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn odd_monomial_vanishes() {
        let rule = gauss_rule(5).unwrap();
        assert!(rule.integrate(-1.0, 1.0, |x| x.powi(9)).abs() <= 1e-14);
    }

    #[test]
    fn exp_poly_examples() {
        assert_eq!(integrate_exp_poly(0.0, &[1.0], 0.0, 1.0), 1.0);
        assert_relative_eq!(integrate_exp_poly(1.0, &[0.0, 1.0], 0.0, 1.0), 1.0, max_relative = 1e-15);
        // (e^2 - 1)/2 - (e^2 + 1)/4, evaluated to 30 digits.
        let expected = 1.097264024732662556807607598;
        assert_relative_eq!(integrate_exp_poly(2.0, &[1.0, -1.0], 0.0, 1.0), expected, max_relative = 1e-14);
    }

    #[test]
    fn weighted_examples() {
        let one = WeightFunction::linear(0.0, 0.0);
        assert_relative_eq!(integrate_weighted(|_| 1.0, &one, 0.0, 1.0, 2).unwrap(), 1.0, epsilon = 1e-15);
        let decay = WeightFunction::linear(-1.0, 0.0);
        let got = integrate_weighted(|_| 1.0, &decay, 0.0, 1.0, 16).unwrap();
        assert!((got - (1.0 - (-1f64).exp())).abs() <= 1e-12);
        assert_eq!(integrate_weighted(|_| 1.0, &one, 0.0, 1.0, 0), Err(Error::UnsupportedOrder(0)));
    }

    #[test]
    fn gauss_matches_exp_poly_up_to_peclet_ten() {
        for &pe in &[0.01, 0.5, 1.0, 2.5, 5.0, 10.0] {
            let h = 0.1;
            let rate = -2.0 * pe / h;
            let w = WeightFunction::linear(rate, 0.3);
            for poly in [[1.0, 0.0], [0.0, 1.0], [1.0, -1.0 / h]] {
                let exact = integrate_exp_poly(rate, &poly, 0.3, 0.3 + h) * (-rate * 0.3).exp();
                let gauss =
                    integrate_weighted(|x| poly[0] + poly[1] * x, &w, 0.3, 0.3 + h, 16).unwrap();
                assert!(
                    (exact - gauss).abs() <= 1e-11 * exact.abs(),
                    "pe={pe} poly={poly:?} {exact} vs {gauss}"
                );
            }
        }
    }

    #[test]
    fn taylor_shift_cubic() {
        // p(x) = 1 + 2x + 3x^2 + 4x^3 at x = 2 + t
        let c = taylor_shift(&[1.0, 2.0, 3.0, 4.0], 2.0);
        assert_eq!(c, vec![49.0, 62.0, 27.0, 4.0]);
    }

    proptest! {
        #[test]
        fn linear_in_poly(a in -20.0f64..20.0, p in prop::collection::vec(0.0f64..1.0, 4),
                          q in prop::collection::vec(0.0f64..1.0, 4), x0 in 0.0f64..1.0, len in 0.01f64..0.5) {
            let x1 = x0 + len;
            let sum: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + b).collect();
            let lhs = integrate_exp_poly(a, &sum, x0, x1);
            let rhs = integrate_exp_poly(a, &p, x0, x1) + integrate_exp_poly(a, &q, x0, x1);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
        }

        #[test]
        fn branches_agree_near_threshold(m in 0usize..4, z in 1.0f64..4.0, neg in any::<bool>()) {
            let z = if neg { -z } else { z };
            let s = exp_moment_series(m, z);
            let r = exp_moment_recurrence(m, z);
            prop_assert!((s - r).abs() <= 1e-12 * s.abs(), "m={} z={} {} {}", m, z, s, r);
        }

        #[test]
        fn translation_identity(a in -50.0f64..50.0, x0 in -1.0f64..1.0, len in 1e-3f64..0.2) {
            let lhs = integrate_exp_poly(a, &[1.0], x0, x0 + len);
            let rhs = (a * x0).exp() * integrate_exp_poly_local(a, &[1.0], len);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs());
        }
    }
}
