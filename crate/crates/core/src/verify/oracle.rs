//! Reference computations independent of the production kernels: 256-bit
//! binary floating point for special functions and closed-form integrals,
//! dense elimination for linear systems.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::{Error, Result};

type Hp = FBig<HalfEven, 2>;

const PRECISION: usize = 256;

fn hp(x: f64) -> Hp {
    Hp::try_from(x).expect("finite input").with_precision(PRECISION).value()
}

fn to_f64(x: &Hp) -> f64 {
    x.to_f64().value()
}

/// `coth(x) - 1/x` evaluated at 256 bits. `x` must be nonzero.
pub fn cothm(x: f64) -> f64 {
    assert!(x != 0.0 && x.is_finite());
    let one = hp(1.0);
    let x = hp(x);
    let e2 = (&x + &x).exp();
    let coth = (&e2 + &one) / (&e2 - &one);
    to_f64(&(coth - &one / &x))
}

/// `∫_{x0}^{x1} e^{a x} Σ_m poly[m] x^m dx` from the antiderivative
/// `e^{ax} Σ_j (-1)^j m!/(m-j)! x^{m-j} / a^{j+1}`, evaluated at 256 bits.
pub fn exp_poly_integral(a: f64, poly: &[f64], x0: f64, x1: f64) -> f64 {
    let zero = hp(0.0);
    let (ah, x0h, x1h) = (hp(a), hp(x0), hp(x1));
    let antiderivative = |x: &Hp| -> Hp {
        let mut total = zero.clone();
        for (m, &c) in poly.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut term = zero.clone();
            if a == 0.0 {
                let mut p = hp(1.0);
                for _ in 0..=m {
                    p = &p * x;
                }
                term = p / hp((m + 1) as f64);
            } else {
                // coefficient of x^{m-j}: (-1)^j m!/(m-j)! / a^{j+1}
                let mut coef = hp(1.0) / &ah;
                for j in 0..=m {
                    let mut p = hp(1.0);
                    for _ in 0..(m - j) {
                        p = &p * x;
                    }
                    term += &coef * p;
                    coef = -(coef * hp((m - j) as f64)) / &ah;
                }
            }
            total += hp(c) * term;
        }
        if a == 0.0 {
            total
        } else {
            total * (&ah * x).exp()
        }
    };
    to_f64(&(antiderivative(&x1h) - antiderivative(&x0h)))
}

/// Solve a dense square system by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("dense system of order {n}")));
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[piv][col] == 0.0 {
            return Err(Error::ZeroPivot { row: col });
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m == 0.0 {
                continue;
            }
            for c in col..n {
                a[row][c] -= m * a[col][c];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}
