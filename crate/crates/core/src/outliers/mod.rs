//! Outlier detection by an l1-penalized lifted regression with one offset
//! per observation, solved by block coordinate descent.

mod wavelet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifted::{fit_lifted_linear, is_constant, residuals, CalibrationSet, LiftedFit};
use crate::stats::mean;

pub use wavelet::{haar_dwt, haar_idwt, mad_sigma, truncate_pow2, WaveletDetail};

pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSolution {
    pub beta0: f64,
    pub beta1: f64,
    /// Per-point offsets; zero exactly for inliers.
    pub gamma: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    /// `0.5 * sum (y - beta0 - beta1 f - gamma)^2 + lambda * sum |gamma|`.
    pub objective: f64,
    pub outlier_indices: Vec<usize>,
    /// Objective after every sweep.
    pub trace: Vec<f64>,
}

impl OutlierSolution {
    /// Residuals `y - beta0 - beta1 f_hat` before the offsets.
    pub fn residuals(&self, data: &CalibrationSet) -> Vec<f64> {
        data.responses().iter().zip(data.predictions()).map(|(&y, &f)| y - self.beta0 - self.beta1 * f).collect()
    }
}

pub fn soft_threshold(u: f64, lambda: f64) -> f64 {
    let m = u.abs() - lambda;
    if m > 0.0 {
        m.copysign(u)
    } else {
        0.0
    }
}

/// `0.5 * RSS + lambda * |gamma|_1` for given parameters.
pub fn outlier_objective(data: &CalibrationSet, beta0: f64, beta1: f64, gamma: &[f64], lambda: f64) -> f64 {
    let rss: f64 = data
        .responses()
        .iter()
        .zip(data.predictions())
        .zip(gamma)
        .map(|((&y, &f), &g)| {
            let r = y - beta0 - beta1 * f - g;
            r * r
        })
        .sum();
    0.5 * rss + lambda * gamma.iter().map(|g| g.abs()).sum::<f64>()
}

/// `sigma_MAD * sqrt(2 ln n)` where `sigma_MAD` comes from the finest Haar
/// details of the lifted residuals (the trailing power-of-two block).
pub fn lambda_max(calib: &CalibrationSet, fit: &LiftedFit) -> Result<f64> {
    if calib.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: calib.len() });
    }
    let r = residuals(fit, calib)?;
    let w = haar_dwt(truncate_pow2(&r))?;
    let sigma = mad_sigma(w.finest())?;
    Ok(sigma * (2.0 * (calib.len() as f64).ln()).sqrt())
}

/// Block coordinate descent with the default tolerance and iteration cap.
pub fn detect_outliers(data: &CalibrationSet, lambda: f64) -> Result<OutlierSolution> {
    detect_outliers_with(data, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Alternates least squares for `(beta0, beta1)` on `y - gamma` with
/// soft-thresholding of the residuals for `gamma`, until the l1 change of
/// all parameters in one sweep is at most `tol`.
pub fn detect_outliers_with(data: &CalibrationSet, lambda: f64, tol: f64, max_iter: usize) -> Result<OutlierSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = data.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let (y, f) = (data.responses(), data.predictions());
    let f_mean = mean(f);
    let d: Vec<f64> = f.iter().map(|v| v - f_mean).collect();
    let sdd: f64 = d.iter().map(|v| v * v).sum();
    if is_constant(f, sdd) {
        return Err(Error::DegenerateDesign("predictions are constant".into()));
    }

    let mut gamma = vec![0.0; n];
    let (mut beta0, mut beta1) = (f64::NAN, f64::NAN);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // least squares of (y - gamma) on f, in centered form
        let z_mean = y.iter().zip(&gamma).map(|(a, g)| a - g).sum::<f64>() / n as f64;
        let b1 = y.iter().zip(&gamma).zip(&d).map(|((a, g), di)| (a - g) * di).sum::<f64>() / sdd;
        let b0 = z_mean - b1 * f_mean;
        let mut change = (b0 - beta0).abs() + (b1 - beta1).abs();
        if iterations == 1 {
            change = f64::INFINITY;
        }
        beta0 = b0;
        beta1 = b1;
        for ((g, &yi), &fi) in gamma.iter_mut().zip(y).zip(f) {
            let new = soft_threshold(yi - beta0 - beta1 * fi, lambda);
            change += (new - *g).abs();
            *g = new;
        }
        trace.push(outlier_objective(data, beta0, beta1, &gamma, lambda));
        if change <= tol {
            converged = true;
            break;
        }
    }
    let solution = OutlierSolution {
        beta0,
        beta1,
        outlier_indices: gamma.iter().enumerate().filter(|(_, g)| **g != 0.0).map(|(i, _)| i).collect(),
        objective: *trace.last().unwrap_or(&f64::NAN),
        gamma,
        lambda,
        iterations,
        trace,
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::NonConvergence { iterations, last: Box::new(solution) })
    }
}

/// How [`select_lambda`] scores a candidate penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LambdaCriterion {
    /// `(n - k) ln(RSS_in / (n - k)) + 2 k ln n` for `k` flagged points:
    /// scale-free, and flagging a point pays off only when its residual
    /// exceeds roughly the universal threshold of the inlier noise.
    #[default]
    Penalized,
    /// Inlier residual sum of squares divided by the inlier count.
    InlierMeanRss,
}

fn score(sol: &OutlierSolution, data: &CalibrationSet, criterion: LambdaCriterion) -> Option<f64> {
    let inlier_rss: f64 =
        sol.residuals(data).iter().zip(&sol.gamma).filter(|(_, g)| **g == 0.0).map(|(r, _)| r * r).sum();
    let flagged = sol.outlier_indices.len();
    let inliers = data.len() - flagged;
    match criterion {
        LambdaCriterion::Penalized if inliers >= 3 => {
            let m = inliers as f64;
            Some(m * (inlier_rss / m).ln() + 2.0 * flagged as f64 * (data.len() as f64).ln())
        }
        LambdaCriterion::Penalized => None,
        LambdaCriterion::InlierMeanRss if inliers > 0 => Some(inlier_rss / inliers as f64),
        LambdaCriterion::InlierMeanRss => None,
    }
}

/// Runs detection on an even grid over `[0, lambda_max]` (both ends
/// included) and keeps the best-scoring penalty; ties go to the larger
/// penalty.
pub fn select_lambda(
    data: &CalibrationSet,
    grid_size: usize,
    criterion: LambdaCriterion,
) -> Result<(f64, OutlierSolution)> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter("lambda grid needs at least 2 points".into()));
    }
    let fit = fit_lifted_linear(data)?;
    let lmax = lambda_max(data, &fit)?;
    let grid: Vec<f64> = (0..grid_size).map(|i| lmax * i as f64 / (grid_size - 1) as f64).collect();

    #[cfg(feature = "parallel")]
    let solutions: Vec<OutlierSolution> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&l| detect_outliers(data, l)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let solutions: Vec<OutlierSolution> = grid.iter().map(|&l| detect_outliers(data, l)).collect::<Result<_>>()?;

    if solutions.iter().all(|s| s.outlier_indices.len() == data.len()) {
        return Err(Error::ModelUnsuitable);
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, sol) in solutions.iter().enumerate() {
        if let Some(v) = score(sol, data, criterion) {
            // iterating upward in lambda, `<=` hands ties to the larger penalty
            if best.map_or(true, |(b, _)| v <= b) {
                best = Some((v, i));
            }
        }
    }
    let (_, i) = best.ok_or(Error::ModelUnsuitable)?;
    let sol = solutions.into_iter().nth(i).unwrap();
    Ok((sol.lambda, sol))
}
