//! Numerical oracles shared by the integration suites. Nothing here calls
//! into the library's own density or moment code paths except `sn_pdf`,
//! which is checked independently in the distribution suite.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral of `f` over [-12, 12] split at the origin and unit knots so the
/// recursion sees smooth pieces.
pub fn integrate_line<F: Fn(f64) -> f64>(f: &F, tol: f64) -> f64 {
    (-12..12)
        .map(|k| adaptive_simpson(f, k as f64, (k + 1) as f64, tol / 24.0))
        .sum()
}

/// Standard normal CDF from the erf Maclaurin series (|x| small) or the
/// continued fraction for the tail; independent of the library's erfc.
pub fn normal_cdf_oracle(x: f64) -> f64 {
    let z = x / 2f64.sqrt();
    if z.abs() < 2.0 {
        let mut term = z;
        let mut sum = z;
        for k in 1..200 {
            term *= -z * z / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        0.5 * (1.0 + 2.0 / PI.sqrt() * sum)
    } else {
        // erfc(|z|) by Lentz's continued fraction.
        let a = z.abs();
        let mut f = a;
        let (mut c, mut d) = (a, 0.0);
        for k in 1..300 {
            let coef = k as f64 / 2.0;
            d = a + coef * d;
            d = if d == 0.0 { 1e-300 } else { 1.0 / d };
            c = a + coef / c;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let erfc = (-a * a).exp() / (f * PI.sqrt());
        if z > 0.0 {
            1.0 - 0.5 * erfc
        } else {
            0.5 * erfc
        }
    }
}

/// Skew-normal density built from the oracle CDF.
pub fn sn_density_oracle(alpha: f64, x: f64) -> f64 {
    2.0 * (-0.5 * x * x).exp() / (2.0 * PI).sqrt() * normal_cdf_oracle(alpha * x)
}

/// E[X^order] under SN(alpha) by quadrature.
pub fn raw_moment_by_quadrature(alpha: f64, order: i32) -> f64 {
    integrate_line(&|x: f64| x.powi(order) * sn_density_oracle(alpha, x), 1e-13)
}

/// Kolmogorov distance between the empirical law of `values` and U(0, 1).
pub fn uniform_ks_distance(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i as f64 + 1.0) / n - u).max(u - i as f64 / n))
        .fold(0.0, f64::max)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
