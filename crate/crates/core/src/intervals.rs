//! Point-wise prediction intervals from a lifted fit and coverage checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifted::{CalibrationSet, LiftedFit};
use crate::stats::t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StudentT,
    Mcmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    /// Nominal coverage `1 - alpha`.
    pub level: f64,
    pub method: Method,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }
}

/// Empirical coverage at each nominal level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCurve {
    pub levels: Vec<f64>,
    pub empirical: Vec<f64>,
}

impl ReliabilityCurve {
    pub fn max_deviation(&self) -> f64 {
        self.levels.iter().zip(&self.empirical).map(|(l, e)| (l - e).abs()).fold(0.0, f64::max)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")))
    }
}

fn check_fit(fit: &LiftedFit) -> Result<()> {
    if fit.n_calb < 3 {
        return Err(Error::InsufficientData { needed: 3, got: fit.n_calb });
    }
    if !(fit.ss_fhat > 0.0) {
        return Err(Error::DegenerateDesign("zero spread in calibration predictions".into()));
    }
    Ok(())
}

/// Widening factor `1 + 1/n + (f0 - mu_hat)^2 / SS_f` for a test prediction.
pub fn eta_hat(fit: &LiftedFit, f0: f64) -> Result<f64> {
    check_fit(fit)?;
    let d = f0 - fit.mu_hat;
    Ok(1.0 + 1.0 / fit.n_calb as f64 + d * d / fit.ss_fhat)
}

fn student_t_interval(fit: &LiftedFit, f0: f64, alpha: f64, t: f64) -> Result<Interval> {
    let eta = eta_hat(fit, f0)?;
    let one_minus_r2 = (1.0 - fit.r_star * fit.r_star).max(0.0);
    let half = (fit.a_squared() * one_minus_r2 * fit.s_y * fit.s_y * eta).sqrt() * t;
    let center = fit.predict(f0);
    Ok(Interval { center, lower: center - half, upper: center + half, level: 1.0 - alpha, method: Method::StudentT })
}

/// Student-t prediction interval for the response at a test prediction `f0`.
///
/// An exact calibration fit gives a zero-width interval at the lifted
/// prediction.
pub fn prediction_interval(fit: &LiftedFit, f0: f64, alpha: f64) -> Result<Interval> {
    check_alpha(alpha)?;
    check_fit(fit)?;
    let t = t_quantile(1.0 - alpha / 2.0, fit.df())?;
    student_t_interval(fit, f0, alpha, t)
}

/// [`prediction_interval`] for many test predictions, sharing the quantile.
pub fn prediction_intervals(fit: &LiftedFit, f0: &[f64], alpha: f64) -> Result<Vec<Interval>> {
    check_alpha(alpha)?;
    check_fit(fit)?;
    let t = t_quantile(1.0 - alpha / 2.0, fit.df())?;
    f0.iter().map(|&f| student_t_interval(fit, f, alpha, t)).collect()
}

/// Plug-in estimate `sigma_u_hat^2 * eta_hat(f0)` of the conditional
/// prediction variance. Population terms of the exact bound are not
/// estimable, so this is a diagnostic rather than a bound.
pub fn mspe_bound_estimate(fit: &LiftedFit, f0: f64) -> Result<f64> {
    Ok(fit.sigma_u_hat * fit.sigma_u_hat * eta_hat(fit, f0)?)
}

pub fn empirical_coverage(intervals: &[Interval], y0: &[f64]) -> Result<f64> {
    if intervals.len() != y0.len() {
        return Err(Error::shape(format!("{} responses", intervals.len()), y0.len()));
    }
    if intervals.is_empty() {
        return Err(Error::InvalidInput("no intervals to score".into()));
    }
    let hits = intervals.iter().zip(y0).filter(|(iv, &y)| iv.contains(y)).count();
    Ok(hits as f64 / y0.len() as f64)
}

/// Coverage of Student-t intervals on `test` at each level in `levels`
/// (ascending, each in `(0, 1)`).
pub fn reliability_curve(fit: &LiftedFit, test: &CalibrationSet, levels: &[f64]) -> Result<ReliabilityCurve> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("no coverage levels given".into()));
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::InvalidParameter(format!("level {l} not in (0, 1)")));
    }
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("levels must be sorted ascending".into()));
    }
    let mut empirical = Vec::with_capacity(levels.len());
    for &level in levels {
        let ivs = prediction_intervals(fit, test.predictions(), 1.0 - level)?;
        empirical.push(empirical_coverage(&ivs, test.responses())?);
    }
    Ok(ReliabilityCurve { levels: levels.to_vec(), empirical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifted::fit_lifted_linear;
    use approx::assert_abs_diff_eq;

    fn fit(y: &[f64], f: &[f64]) -> LiftedFit {
        fit_lifted_linear(&CalibrationSet::new(y.to_vec(), f.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn eta_examples() {
        let f = fit(&[0., 1., 3.], &[0., 1., 2.]);
        assert_abs_diff_eq!(eta_hat(&f, 0.0).unwrap(), 11.0 / 6.0, epsilon = 1e-15);
        let f: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = f.iter().map(|v| v * v).collect();
        let g = fit(&y, &f);
        assert_abs_diff_eq!(eta_hat(&g, g.mu_hat).unwrap(), 1.05, epsilon = 1e-15);
        assert!(eta_hat(&g, g.mu_hat + 2.0).unwrap() > eta_hat(&g, g.mu_hat + 1.0).unwrap());
    }

    #[test]
    fn exact_fit_has_zero_width() {
        let f = fit(&[1., 3., 5., 7.], &[0., 1., 2., 3.]);
        let iv = prediction_interval(&f, 10.0, 0.05).unwrap();
        assert_eq!(iv.width(), 0.0);
        assert_abs_diff_eq!(iv.center, 21.0, epsilon = 1e-12);
        assert_eq!(mspe_bound_estimate(&f, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hand_instance() {
        // OLS by hand: beta1 = 1.3, beta0 = -0.2, RSS = 0.3; for df = 2 the t quantile is
        // (2p - 1) / sqrt(2p(1 - p))
        let f = fit(&[0., 1., 2., 4.], &[0., 1., 2., 3.]);
        let iv = prediction_interval(&f, 1.5, 0.05).unwrap();
        let eta = 1.0 + 0.25;
        let p = 0.975f64;
        let t = (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
        let half = (0.3f64 / 2.0 * eta).sqrt() * t;
        assert_abs_diff_eq!(iv.center, 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(iv.upper - iv.center, half, epsilon = 1e-9);
        assert_abs_diff_eq!(iv.center - iv.lower, half, epsilon = 1e-9);
    }

    #[test]
    fn width_tracks_sqrt_eta() {
        let f = fit(&[0.3, 1.1, 1.7, 3.4, 3.9], &[0., 1., 2., 3., 4.]);
        let w = |f0: f64| prediction_interval(&f, f0, 0.1).unwrap().width();
        let e = |f0: f64| eta_hat(&f, f0).unwrap();
        let (a, b) = (f.mu_hat + 1.0, f.mu_hat + 2f64.sqrt());
        assert_abs_diff_eq!(w(b) / w(a), (e(b) / e(a)).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn width_shrinks_with_correlation() {
        let base = fit(&[0.3, 1.1, 1.7, 3.4, 3.9], &[0., 1., 2., 3., 4.]);
        let mut prev = f64::INFINITY;
        for r in [0.0, 0.3, 0.6, 0.9, 0.99] {
            let g = LiftedFit { r_star: r, ..base };
            let w = prediction_interval(&g, 1.0, 0.05).unwrap().width();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn coverage_counts() {
        let iv = |l, u| Interval { center: 0.0, lower: l, upper: u, level: 0.9, method: Method::StudentT };
        let ivs = [iv(-1.0, 1.0), iv(-1.0, 1.0)];
        assert_eq!(empirical_coverage(&ivs, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(empirical_coverage(&ivs, &[2.0, -2.0]).unwrap(), 0.0);
        assert_eq!(empirical_coverage(&ivs, &[0.5, 3.0]).unwrap(), 0.5);
        assert!(empirical_coverage(&[], &[]).is_err());
        assert!(empirical_coverage(&ivs, &[0.0]).is_err());
    }

    #[test]
    fn reliability_rejects_bad_levels() {
        let f = fit(&[0., 1., 3.], &[0., 1., 2.]);
        let t = CalibrationSet::new(vec![0.0], vec![0.0]).unwrap();
        assert!(reliability_curve(&f, &t, &[0.0, 0.5]).is_err());
        assert!(reliability_curve(&f, &t, &[0.9, 0.5]).is_err());
        let c = reliability_curve(&f, &t, &[0.5, 0.9]).unwrap();
        assert_eq!(c.empirical.len(), 2);
    }
}
