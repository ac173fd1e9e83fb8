//! Special functions used by the kernel closed forms.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Error function, `(2/√π) ∫_0^x e^{-w²} dw`.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, accurate in the far right tail.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `m!! = m·(m-2)···1` for odd `m >= 1`.
pub fn double_factorial(m: u64) -> Result<u128> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::invalid(
            "m",
            format!("double factorial needs an odd positive integer, got {m}"),
        ));
    }
    let mut acc: u128 = 1;
    let mut k = m;
    while k > 1 {
        acc = acc
            .checked_mul(k as u128)
            .ok_or_else(|| Error::invalid("m", format!("{m}!! overflows u128")))?;
        k -= 2;
    }
    Ok(acc)
}

/// `C_p = 2^{p-1}(p-1)! / (π (2p-3)!!)`, the constant making the
/// Poisson–Cauchy density a probability density in the log variable.
///
/// Evaluated as `(1/π) ∏_{k=1}^{p-1} 2k/(2k-1)`, which never overflows.
pub fn poisson_cauchy_constant(p: u32) -> f64 {
    let prod: f64 = (1..p).map(|k| (2 * k) as f64 / (2 * k - 1) as f64).product();
    prod / PI
}

/// `∫_y^∞ (1 + w²)^{-p} dw` for `y >= 0`.
///
/// Below `y = 8` the reduction `J_{k+1} = (2k-1)/(2k)·J_k - y/(2k(1+y²)^k)`
/// from `J_1 = atan(1/y)` is used; above it the binomial series in `1/y²`,
/// which avoids the cancellation the reduction suffers for large `y`.
pub fn cauchy_power_tail(p: u32, y: f64) -> f64 {
    debug_assert!(p >= 1 && y >= 0.0);
    if y >= 8.0 {
        let inv2 = 1.0 / (y * y);
        let mut coef = 1.0; // (-1)^k C(p+k-1, k)
        let mut pow = y.powi(1 - 2 * p as i32);
        let mut sum = 0.0;
        for k in 0..60u32 {
            let term = coef * pow / (2.0 * (p + k) as f64 - 1.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            coef *= -((p + k) as f64) / (k + 1) as f64;
            pow *= inv2;
        }
        return sum;
    }
    let mut j = (1.0f64).atan2(y);
    let base = 1.0 + y * y;
    let mut base_pow = base; // (1+y²)^k
    for k in 1..p {
        let kf = k as f64;
        j = (2.0 * kf - 1.0) / (2.0 * kf) * j - y / (2.0 * kf * base_pow);
        base_pow *= base;
    }
    j.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series of erf, summed until terms drop below 1e-20.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term.abs() > 1e-20 {
            k += 1.0;
            term *= -x * x / k;
            sum += term / (2.0 * k + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-14);
        // the alternating series cancels badly beyond x ≈ 2
        for i in 1..40 {
            let x = i as f64 * 0.05;
            assert!((erf(x) - erf_series(x)).abs() < 1e-14, "x = {x}");
            assert_eq!(erf(-x), -erf(x));
        }
        assert_eq!(erf(40.0), 1.0);
        assert_eq!(erf(-40.0), -1.0);
        assert!((erfc(3.0) - 2.209049699858544e-5).abs() < 1e-19);
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(1).unwrap(), 1);
        assert_eq!(double_factorial(3).unwrap(), 3);
        assert_eq!(double_factorial(7).unwrap(), 105);
        assert!(double_factorial(0).is_err());
        assert!(double_factorial(4).is_err());
        assert!(double_factorial(101).is_err());
    }

    #[test]
    fn constant_matches_factorial_formula() {
        for p in 2u32..=12 {
            let fact: f64 = (1..p).map(|k| k as f64).product();
            let df = double_factorial(2 * p as u64 - 3).unwrap() as f64;
            let direct = 2f64.powi(p as i32 - 1) * fact / (PI * df);
            let c = poisson_cauchy_constant(p);
            assert!((c - direct).abs() < 1e-14 * direct, "p = {p}");
        }
        assert!((poisson_cauchy_constant(2) - 2.0 / PI).abs() < 1e-16);
    }

    #[test]
    fn cauchy_tail_half_line_is_inverse_double_constant() {
        for p in 1u32..=6 {
            let half = cauchy_power_tail(p, 0.0);
            let c = if p == 1 { 1.0 / PI } else { poisson_cauchy_constant(p) };
            assert!((half - 0.5 / c).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn cauchy_tail_branches_agree() {
        // Simpson oracle on the substitution w = y + u/(1-u)
        let oracle = |p: u32, y: f64| {
            let f = |u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let w = y + u / (1.0 - u);
                (1.0 + w * w).powi(-(p as i32)) / ((1.0 - u) * (1.0 - u))
            };
            let m = 200_000;
            let h = 1.0 / m as f64;
            let mut s = f(0.0) + f(1.0);
            for i in 1..m {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            s * h / 3.0
        };
        for p in [2u32, 3, 4] {
            for y in [0.5, 3.0, 7.999, 8.0, 20.0] {
                let got = cauchy_power_tail(p, y);
                let want = oracle(p, y);
                assert!((got - want).abs() < 1e-10 * want.max(1e-300) + 1e-14, "p={p} y={y}: {got} vs {want}");
            }
        }
    }
}
