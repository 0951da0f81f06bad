//! Student-t and standard normal distribution functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::special::{erfc, inc_beta, ln_gamma};
use crate::error::{Error, Result};

fn check_df(df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidParameter("degrees of freedom must be >= 1".into()));
    }
    Ok(f64::from(df))
}

fn check_prob(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {p} not in (0, 1)")));
    }
    Ok(())
}

/// Lower tail `Pr(T <= x)` for `x <= 0`.
fn t_lower_tail(x: f64, nu: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let x2 = x * x;
    if x2 < nu {
        // small |x|: avoid cancellation in nu / (nu + x^2) near 1
        0.5 - 0.5 * inc_beta(0.5, 0.5 * nu, x2 / (nu + x2))
    } else {
        0.5 * inc_beta(0.5 * nu, 0.5, nu / (nu + x2))
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn t_cdf(x: f64, df: u32) -> Result<f64> {
    let nu = check_df(df)?;
    if x.is_nan() {
        return Err(Error::InvalidParameter("x is NaN".into()));
    }
    Ok(if x <= 0.0 { t_lower_tail(x, nu) } else { 1.0 - t_lower_tail(-x, nu) })
}

/// Student-t density.
pub fn t_pdf(x: f64, df: u32) -> Result<f64> {
    let nu = check_df(df)?;
    Ok(t_ln_pdf(x, nu).exp())
}

fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln() - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

/// Solves `t_lower_tail(x) = p` for `p < 0.5` by bisection then Newton.
fn t_lower_quantile(p: f64, nu: f64) -> f64 {
    let mut hi = 0.0;
    let mut lo = -1.0;
    while t_lower_tail(lo, nu) > p {
        hi = lo;
        lo *= 2.0;
        if lo < -1e300 {
            return f64::NEG_INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_lower_tail(mid, nu) > p {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-6 * hi.abs().max(1.0) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let f = t_lower_tail(x, nu) - p;
        let raw = x - f / t_ln_pdf(x, nu).exp();
        // converged: the step is below rounding, so keep it rather than
        // letting the bracket test bounce back to a midpoint
        if (raw - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return raw;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        x = if raw > lo && raw < hi { raw } else { 0.5 * (lo + hi) };
    }
    x
}

/// Student-t quantile: the `x` with `t_cdf(x, df) = p`.
pub fn t_quantile(p: f64, df: u32) -> Result<f64> {
    let nu = check_df(df)?;
    check_prob(p)?;
    Ok(if p == 0.5 {
        0.0
    } else if p < 0.5 {
        t_lower_quantile(p, nu)
    } else {
        -t_lower_quantile(1.0 - p, nu)
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation followed by Halley refinement against
/// the erfc-based CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    if p == 0.5 {
        return Ok(0.0);
    }
    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        // work in the smaller tail to keep relative precision
        let e = if x < 0.0 { normal_cdf(x) - p } else { (1.0 - p) - normal_cdf(-x) };
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t_cdf_examples() {
        assert_eq!(t_cdf(0.0, 5).unwrap(), 0.5);
        assert_eq!(t_cdf(f64::INFINITY, 3).unwrap(), 1.0);
        assert_eq!(t_cdf(f64::NEG_INFINITY, 3).unwrap(), 0.0);
        // df = 1 is Cauchy
        let cauchy = 0.5 + 2f64.atan() / PI;
        assert_abs_diff_eq!(t_cdf(2.0, 1).unwrap(), cauchy, epsilon = 1e-12);
        assert_abs_diff_eq!(t_cdf(2.0, 1).unwrap(), 0.85242, epsilon = 5e-6);
    }

    #[test]
    fn t_cdf_rejects_zero_df() {
        assert!(matches!(t_cdf(1.0, 0), Err(Error::InvalidParameter(_))));
        assert!(t_quantile(0.3, 0).is_err());
    }

    #[test]
    fn t_cdf_matches_incomplete_beta_definition() {
        // F(x) = 1 - I_{nu/(nu+x^2)}(nu/2, 1/2) / 2 for x > 0, checked via statrs
        for df in [1u32, 2, 3, 7, 30, 250] {
            for &x in &[0.1, 0.7, 1.5, 3.0, 12.0] {
                let nu = f64::from(df);
                let oracle = 1.0 - 0.5 * statrs::function::beta::beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
                assert_abs_diff_eq!(t_cdf(x, df).unwrap(), oracle, epsilon = 1e-10);
                assert_abs_diff_eq!(t_cdf(-x, df).unwrap(), 1.0 - oracle, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn t_quantile_examples() {
        assert_eq!(t_quantile(0.5, 7).unwrap(), 0.0);
        let cauchy = (PI * (0.975 - 0.5)).tan();
        assert_abs_diff_eq!(t_quantile(0.975, 1).unwrap(), cauchy, epsilon = 1e-9);
        assert_abs_diff_eq!(t_quantile(0.975, 1).unwrap(), 12.70620, epsilon = 5e-6);
        assert_abs_diff_eq!(t_quantile(0.975, 10).unwrap(), 2.228139, epsilon = 5e-7);
    }

    #[test]
    fn quantile_rejects_bad_probabilities() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(t_quantile(p, 4).is_err());
            assert!(normal_quantile(p).is_err());
        }
    }

    #[test]
    fn extreme_tails() {
        let q = t_quantile(1e-12, 3).unwrap();
        assert!((t_cdf(q, 3).unwrap() - 1e-12).abs() < 1e-20);
        let z = normal_quantile(1e-15).unwrap();
        assert!((normal_cdf(z) / 1e-15 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn normal_quantile_examples() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(normal_quantile(0.975).unwrap(), 1.959_963_984_540_054, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_quantile(0.841345).unwrap(), 1.0, epsilon = 1e-5);
        for &p in &[1e-8, 0.01, 0.3, 0.77, 0.999] {
            let oracle = statrs::function::erf::erfc_inv(2.0 * p) * -std::f64::consts::SQRT_2;
            assert_abs_diff_eq!(normal_quantile(p).unwrap(), oracle, epsilon = 1e-9);
        }
    }
}
