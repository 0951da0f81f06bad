//! The lifted linear model: simple regression of held-out responses on a
//! model's predictions, its diagnostics, and the consistency test of
//! `beta0 = 0, beta1 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{bivariate_t_linf_quantile, mean, LinfQuantile, Seed};

/// Paired held-out responses and model predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    responses: Vec<f64>,
    predictions: Vec<f64>,
}

impl CalibrationSet {
    pub fn new(responses: Vec<f64>, predictions: Vec<f64>) -> Result<Self> {
        if responses.len() != predictions.len() {
            return Err(Error::shape(
                format!("{} predictions", responses.len()),
                format!("{} predictions", predictions.len()),
            ));
        }
        if responses.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("response {i} is not finite")));
        }
        if let Some(i) = predictions.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("prediction {i} is not finite")));
        }
        Ok(CalibrationSet { responses, predictions })
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Same responses paired with another prediction vector.
    pub fn with_predictions(&self, predictions: Vec<f64>) -> Result<Self> {
        CalibrationSet::new(self.responses.clone(), predictions)
    }
}

/// Ordinary least-squares fit of `y = beta0 + beta1 * f_hat + u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedFit {
    /// Average bias correction.
    pub beta0_hat: f64,
    /// Scale adjustment.
    pub beta1_hat: f64,
    /// Empirical correlation of responses and predictions.
    pub r_star: f64,
    pub s_y: f64,
    pub s_fhat: f64,
    pub y_mean: f64,
    /// Mean prediction.
    pub mu_hat: f64,
    /// Residual scale, `sqrt(RSS / (n - 2))`.
    pub sigma_u_hat: f64,
    pub n_calb: usize,
    /// `sum (f_hat - mu_hat)^2`.
    pub ss_fhat: f64,
    pub ss_y: f64,
    pub rss: f64,
    /// `(Z^T Z)^{-1}` for the design `Z = [1, f_hat]`, row-major.
    pub cov_scale: [[f64; 2]; 2],
}

impl LiftedFit {
    /// `a^2 = 1 + 1/(n - 2)`.
    pub fn a_squared(&self) -> f64 {
        1.0 + 1.0 / (self.n_calb as f64 - 2.0)
    }

    pub fn df(&self) -> u32 {
        (self.n_calb - 2) as u32
    }

    /// Lifted coefficient of determination under squared error,
    /// `1 - RSS / sum (y - y_mean)^2`.
    pub fn r2_calb(&self) -> f64 {
        if self.ss_y == 0.0 {
            return 0.0;
        }
        (1.0 - self.rss / self.ss_y).clamp(0.0, 1.0)
    }

    pub fn predict(&self, f0: f64) -> f64 {
        self.beta0_hat + self.beta1_hat * f0
    }

    /// Standard errors of `(beta0_hat, beta1_hat)`.
    pub fn std_errors(&self) -> (f64, f64) {
        let s2 = self.sigma_u_hat * self.sigma_u_hat;
        ((s2 * self.cov_scale[0][0]).sqrt(), (s2 * self.cov_scale[1][1]).sqrt())
    }
}

/// True when `xs` has no spread relative to its magnitude.
pub(crate) fn is_constant(xs: &[f64], ss: f64) -> bool {
    let first = xs[0];
    if xs.iter().all(|&v| v == first) {
        return true;
    }
    let scale = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (ss / xs.len() as f64).sqrt() <= 1e-12 * scale
}

pub fn fit_lifted_linear(calib: &CalibrationSet) -> Result<LiftedFit> {
    let n = calib.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let (y, f) = (calib.responses(), calib.predictions());
    let y_mean = mean(y);
    let mu_hat = mean(f);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&yi, &fi) in y.iter().zip(f) {
        let (dy, df) = (yi - y_mean, fi - mu_hat);
        sxx += df * df;
        syy += dy * dy;
        sxy += dy * df;
    }
    if is_constant(f, sxx) {
        return Err(Error::DegenerateDesign(
            "predictions are constant; the slope is undefined (use the null model)".into(),
        ));
    }
    let beta1_hat = sxy / sxx;
    let beta0_hat = y_mean - beta1_hat * mu_hat;
    let rss: f64 = y
        .iter()
        .zip(f)
        .map(|(&yi, &fi)| {
            let r = (yi - y_mean) - beta1_hat * (fi - mu_hat);
            r * r
        })
        .sum();
    let r_star = if syy > 0.0 { (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0) } else { 0.0 };
    let nf = n as f64;
    let sum_f = nf * mu_hat;
    let sum_f2 = sxx + nf * mu_hat * mu_hat;
    let det = nf * sxx;
    Ok(LiftedFit {
        beta0_hat,
        beta1_hat,
        r_star,
        s_y: (syy / (nf - 1.0)).sqrt(),
        s_fhat: (sxx / (nf - 1.0)).sqrt(),
        y_mean,
        mu_hat,
        sigma_u_hat: (rss / (nf - 2.0)).sqrt(),
        n_calb: n,
        ss_fhat: sxx,
        ss_y: syy,
        rss,
        cov_scale: [[sum_f2 / det, -sum_f / det], [-sum_f / det, nf / det]],
    })
}

/// `r_i = y_i - (beta0_hat + beta1_hat * f_hat_i)`.
pub fn residuals(fit: &LiftedFit, calib: &CalibrationSet) -> Result<Vec<f64>> {
    if calib.len() != fit.n_calb {
        return Err(Error::shape(format!("{} observations", fit.n_calb), calib.len()));
    }
    Ok(calib
        .responses()
        .iter()
        .zip(calib.predictions())
        .map(|(&y, &f)| (y - fit.y_mean) - fit.beta1_hat * (f - fit.mu_hat))
        .collect())
}

/// Outcome of testing `H0: beta0 = 0, beta1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTest {
    /// Sup-norm of the studentized `(beta0_hat, beta1_hat - 1)`.
    pub statistic: f64,
    pub threshold: f64,
    pub threshold_se: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Symmetric square root of a 2x2 symmetric positive definite matrix.
fn sqrtm_2x2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = det.sqrt();
    let t = (m[0][0] + m[1][1] + 2.0 * s).sqrt();
    [[(m[0][0] + s) / t, m[0][1] / t], [m[1][0] / t, (m[1][1] + s) / t]]
}

fn studentized_statistic(fit: &LiftedFit) -> f64 {
    let d0 = fit.beta0_hat;
    let d1 = fit.beta1_hat - 1.0;
    if fit.sigma_u_hat == 0.0 {
        let scale = fit.y_mean.abs().max(fit.s_y).max(1.0);
        return if d0.abs() <= 1e-12 * scale && d1.abs() <= 1e-12 { 0.0 } else { f64::INFINITY };
    }
    // (Z^T Z)^{1/2} (beta_hat - beta) / sigma_u_hat is standard bivariate t(n - 2) under H0
    let nf = fit.n_calb as f64;
    let sum_f = nf * fit.mu_hat;
    let ztz = [[nf, sum_f], [sum_f, fit.ss_fhat + nf * fit.mu_hat * fit.mu_hat]];
    let root = sqrtm_2x2(ztz);
    let v0 = (root[0][0] * d0 + root[0][1] * d1) / fit.sigma_u_hat;
    let v1 = (root[1][0] * d0 + root[1][1] * d1) / fit.sigma_u_hat;
    v0.abs().max(v1.abs())
}

/// Consistency test against a precomputed sup-norm quantile.
pub fn consistency_test_with_threshold(
    fit: &LiftedFit,
    alpha: f64,
    threshold: &LinfQuantile,
) -> Result<ConsistencyTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")));
    }
    if fit.n_calb < 4 {
        return Err(Error::InsufficientData { needed: 4, got: fit.n_calb });
    }
    let statistic = studentized_statistic(fit);
    Ok(ConsistencyTest {
        statistic,
        threshold: threshold.value,
        threshold_se: threshold.quantile_se,
        alpha,
        reject: statistic > threshold.value,
    })
}

/// Tests whether the model is calibrated (`beta0 = 0` and `beta1 = 1`) at
/// level `alpha`. The critical radius is estimated by seeded Monte Carlo.
pub fn consistency_test(fit: &LiftedFit, alpha: f64, seed: Seed) -> Result<ConsistencyTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")));
    }
    if fit.n_calb < 4 {
        return Err(Error::InsufficientData { needed: 4, got: fit.n_calb });
    }
    let q = bivariate_t_linf_quantile(alpha, fit.df(), seed)?;
    consistency_test_with_threshold(fit, alpha, &q)
}
