//! Closed-form analytics for the constant-coefficient model problem on a
//! uniform mesh: special functions, the exact solution and the three
//! interior-node difference stencils.

use crate::assembly::Formulation;

/// Below this magnitude `coth(x) - 1/x` is evaluated by continued fraction.
const CF_THRESHOLD: f64 = 4.0;
const CF_DEPTH: usize = 28;

/// `coth(x) - 1/x`, odd, accurate to a few ulps for all finite `x`.
///
/// Small and moderate arguments use Lambert's continued fraction
/// `x / (3 + x²/(5 + x²/(7 + ...)))`, which avoids the cancellation of the
/// direct difference.
pub fn cothm(x: f64) -> f64 {
    let ax = x.abs();
    if ax < CF_THRESHOLD {
        let x2 = x * x;
        let mut d = (2 * CF_DEPTH + 3) as f64;
        for j in (1..=CF_DEPTH).rev() {
            d = (2 * j + 1) as f64 + x2 / d;
        }
        x / d
    } else {
        let r = coth_abs(ax) - 1.0 / ax;
        r.copysign(x)
    }
}

/// Overflow-safe `coth(|x|)` for `|x| > 0`.
fn coth_abs(ax: f64) -> f64 {
    1.0 + 2.0 / (2.0 * ax).exp_m1()
}

/// Hyperbolic cotangent; infinite at zero.
pub fn coth(x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY.copysign(x);
    }
    if x.abs() < CF_THRESHOLD {
        1.0 / x + cothm(x)
    } else {
        coth_abs(x.abs()).copysign(x)
    }
}

/// Optimal artificial diffusion `(v h / 2) (coth Pe - 1/Pe)` with
/// `Pe = v h / (2 k)`. Nonnegative and even in `v`.
pub fn kbar(v: f64, k: f64, h: f64) -> f64 {
    let pe = v * h / (2.0 * k);
    0.5 * v * h * cothm(pe)
}

/// Exact solution of `v u' - k u'' = f` on `(0, 1)` with `u(0) = u(1) = 0`.
///
/// Never forms `e^{v/k}` directly; for `|v/k| < 1e-6` the Poisson limit with a
/// first-order correction in `v/k` is used.
pub fn exact_solution(v: f64, k: f64, f: f64, x: f64) -> f64 {
    let r = v / k;
    if r.abs() < 1e-6 {
        return f * x * (1.0 - x) / (2.0 * k) * (1.0 + r * (2.0 * x - 1.0) / 6.0);
    }
    let ratio = if r > 0.0 {
        (r * (x - 1.0)).exp() * (-r * x).exp_m1() / (-r).exp_m1()
    } else {
        (r * x).exp_m1() / r.exp_m1()
    };
    f / v * (x - ratio)
}

/// Coefficients of `c_left u_{j-1} + c_center u_j + c_right u_{j+1} = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCoeffs {
    pub left: f64,
    pub center: f64,
    pub right: f64,
    pub formulation: Formulation,
}

impl StencilCoeffs {
    pub fn new(left: f64, center: f64, right: f64, formulation: Formulation) -> Self {
        StencilCoeffs { left, center, right, formulation }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.left, self.center, self.right]
    }

    pub fn sum(&self) -> f64 {
        self.left + self.center + self.right
    }

    pub fn max_abs(&self) -> f64 {
        self.left.abs().max(self.center.abs()).max(self.right.abs())
    }

    /// Largest componentwise difference relative to `other.max_abs()`.
    pub fn rel_diff(&self, other: &StencilCoeffs) -> f64 {
        let d = (self.left - other.left)
            .abs()
            .max((self.center - other.center).abs())
            .max((self.right - other.right).abs());
        d / other.max_abs()
    }
}

/// Central differences for both derivatives.
pub fn galerkin_stencil(v: f64, k: f64, h: f64) -> StencilCoeffs {
    stencil_with_diffusivity(v, k, h, Formulation::Galerkin)
}

fn stencil_with_diffusivity(v: f64, k: f64, h: f64, formulation: Formulation) -> StencilCoeffs {
    let adv = v / (2.0 * h);
    let diff = k / (h * h);
    StencilCoeffs::new(-adv - diff, 2.0 * diff, adv - diff, formulation)
}

/// The nodally exact stencil `(v/2h)(-(1 + coth Pe), 2 coth Pe, 1 - coth Pe)`.
///
/// At `v = 0`, where `coth Pe` diverges, the pure-diffusion limit is returned.
pub fn optimal_stencil(v: f64, k: f64, h: f64) -> StencilCoeffs {
    let c = coth(v * h / (2.0 * k));
    if v == 0.0 || !c.is_finite() {
        return stencil_with_diffusivity(v, k + kbar(v, k, h), h, Formulation::ArtificialDiffusion);
    }
    let half = v / (2.0 * h);
    StencilCoeffs::new(half * -(1.0 + c), half * (2.0 * c), half * (1.0 - c), Formulation::ArtificialDiffusion)
}

/// Interior stencil of the weighted variational formulation in closed form.
pub fn gamma_stencil(v: f64, k: f64, h: f64) -> StencilCoeffs {
    let c = coth(v * h / (2.0 * k));
    if v == 0.0 || !c.is_finite() {
        return stencil_with_diffusivity(0.0, k, h, Formulation::WeightedVariational);
    }
    StencilCoeffs::new(
        -(v / (2.0 * h)) * (1.0 + c),
        (v / h) * c,
        (v / (2.0 * h)) * (1.0 - c),
        Formulation::WeightedVariational,
    )
}

/// Closed-form stencil for `formulation`.
pub fn stencil_for(formulation: Formulation, v: f64, k: f64, h: f64) -> StencilCoeffs {
    match formulation {
        Formulation::Galerkin => galerkin_stencil(v, k, h),
        Formulation::ArtificialDiffusion => optimal_stencil(v, k, h),
        Formulation::WeightedVariational => gamma_stencil(v, k, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cothm_values() {
        assert_eq!(cothm(0.0), 0.0);
        // (e^2 + 1)/(e^2 - 1) - 1
        assert_relative_eq!(cothm(1.0), 0.31303528549933130364, max_relative = 1e-15);
        assert!((cothm(50.0) - 0.98).abs() <= 1e-15);
        assert_eq!(cothm(-2.5), -cothm(2.5));
        assert_relative_eq!(cothm(1e-5), 1e-5 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn coth_matches_definition() {
        for &x in &[0.3f64, 1.0, 2.5, 3.999, 4.0, 7.0, 40.0, 800.0] {
            let direct = if x < 300.0 { 1.0 / x.tanh() } else { 1.0 };
            assert_relative_eq!(coth(x), direct, max_relative = 4e-16);
            assert_eq!(coth(-x), -coth(x));
        }
        assert_relative_eq!(coth(2.5), 1.0135673098126086, max_relative = 1e-15);
    }

    #[test]
    fn kbar_values() {
        assert_relative_eq!(kbar(1.0, 0.05, 0.1), 0.05 * 0.31303528549933130364, max_relative = 1e-14);
        assert_eq!(kbar(0.0, 1.0, 0.1), 0.0);
        // Pe = 50: k + kbar -> v h / 2
        let (v, h) = (1.0, 0.1);
        let k = v * h / 100.0;
        assert!((k + kbar(v, k, h) - v * h / 2.0).abs() <= 1e-15);
    }

    #[test]
    fn exact_solution_values() {
        for &(v, k) in &[(1.0, 1.0), (10.0, 1.0), (-3.0, 0.5), (1000.0, 1.0)] {
            assert_eq!(exact_solution(v, k, 1.0, 0.0), 0.0);
            assert!(exact_solution(v, k, 1.0, 1.0).abs() < 1e-15);
        }
        // 0.1 (0.5 - (1 - e^5)/(1 - e^10)), 25-digit evaluation
        assert_relative_eq!(exact_solution(10.0, 1.0, 1.0, 0.5), 0.04933071490757152, max_relative = 1e-14);
        assert_relative_eq!(exact_solution(0.0, 1.0, 1.0, 0.5), 0.125, max_relative = 1e-15);
        assert_relative_eq!(exact_solution(1e-9, 1.0, 1.0, 0.5), 0.125, max_relative = 1e-12);
        assert!(exact_solution(1000.0, 1.0, 1.0, 0.999).is_finite());
    }

    #[test]
    fn exact_solution_satisfies_ode() {
        let step = 1e-5;
        for &r in &[1.0, 10.0, 100.0] {
            let (v, k, f) = (r, 1.0, 1.0);
            for i in 1..=50 {
                let x = i as f64 / 51.0;
                let u = |x| exact_solution(v, k, f, x);
                let du = (u(x + step) - u(x - step)) / (2.0 * step);
                let d2u = (u(x + step) - 2.0 * u(x) + u(x - step)) / (step * step);
                // second differences at step 1e-5 carry roundoff ~ eps |u| / step^2
                let res = v * du - k * d2u - f;
                assert!(res.abs() <= 1e-6 + 5e-6 * r, "r={r} x={x} res={res}");
            }
        }
    }

    #[test]
    fn galerkin_examples() {
        let s = galerkin_stencil(1.0, 0.05, 0.1);
        assert_relative_eq!(s.left, -10.0, max_relative = 1e-14);
        assert_relative_eq!(s.center, 10.0, max_relative = 1e-14);
        assert!(s.right.abs() <= 1e-14);
        let s = galerkin_stencil(0.0, 1.0, 0.5);
        assert_eq!(s.as_array(), [-4.0, 8.0, -4.0]);
    }

    #[test]
    fn optimal_examples() {
        let s = optimal_stencil(1.0, 0.02, 0.1);
        assert_relative_eq!(s.left, -10.067836549063043, max_relative = 1e-14);
        assert_relative_eq!(s.center, 10.135673098126086, max_relative = 1e-14);
        assert_relative_eq!(s.right, -0.067836549063043, max_relative = 1e-12);
        let s = optimal_stencil(1.0, 0.05, 0.1);
        assert_relative_eq!(s.left, -11.565176427496657, max_relative = 1e-14);
        assert_relative_eq!(s.center, 13.130352854993313, max_relative = 1e-14);
        assert_relative_eq!(s.right, -1.5651764274966565, max_relative = 1e-13);
        let s = optimal_stencil(0.0, 1.0, 0.5);
        assert_eq!(s.as_array(), [-4.0, 8.0, -4.0]);
    }

    #[test]
    fn gamma_equals_optimal_bitwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let pe = 10f64.powf(rng.gen_range(-6.0..50f64.log10()));
            let h = rng.gen_range(1e-3..1.0);
            let k = rng.gen_range(1e-3..10.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let v = sign * pe * 2.0 * k / h;
            let b = optimal_stencil(v, k, h);
            let g = gamma_stencil(v, k, h);
            for (x, y) in b.as_array().iter().zip(g.as_array()) {
                assert!(ulp_distance(*x, y) <= 1, "{x} vs {y}");
            }
        }
    }

    fn ulp_distance(a: f64, b: f64) -> u64 {
        if a == b {
            return 0;
        }
        let ia = a.to_bits() as i64;
        let ib = b.to_bits() as i64;
        if (ia < 0) != (ib < 0) {
            return u64::MAX;
        }
        ia.abs_diff(ib)
    }

    proptest! {
        #[test]
        fn stencils_annihilate_constants(v in -100.0f64..100.0, k in 1e-3f64..10.0, h in 1e-3f64..1.0) {
            for s in [galerkin_stencil(v, k, h), optimal_stencil(v, k, h), gamma_stencil(v, k, h)] {
                prop_assert!(s.sum().abs() <= 1e-12 * s.max_abs());
            }
        }

        #[test]
        fn optimal_is_galerkin_with_kbar(v in -100.0f64..100.0, k in 1e-3f64..10.0, h in 1e-3f64..1.0) {
            let a = optimal_stencil(v, k, h);
            let b = galerkin_stencil(v, k + kbar(v, k, h), h);
            prop_assert!(a.rel_diff(&b) <= 1e-13, "{:?} {:?}", a, b);
        }

        #[test]
        fn kbar_nonnegative_even(v in 0.0f64..1e3, k in 1e-3f64..10.0, h in 1e-3f64..1.0) {
            prop_assert!(kbar(v, k, h) >= 0.0);
            prop_assert_eq!(kbar(v, k, h), kbar(-v, k, h));
        }
    }
}
