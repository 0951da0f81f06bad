//! Plain-Rust side of the browser bindings, testable off the web.

use liftcal::lcd::{rank_models, Link, NullKind, RankedModel};
use liftcal::stats::{noise_sample, NoiseFamily, Seed};
use liftcal::synth::inject_outliers;
use liftcal::{
    fit_lifted_linear, prediction_intervals, reliability_curve, select_lambda, CalibrationSet, LambdaCriterion,
    LiftedFit,
};
use serde::{Deserialize, Serialize};

pub type ApiResult<T> = Result<T, String>;

fn err(e: liftcal::Error) -> String {
    e.to_string()
}

#[derive(Debug, Serialize)]
pub struct Sample {
    pub y: Vec<f64>,
    pub f_hat: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct DemoData {
    pub calib: Sample,
    pub test: Sample,
    /// Calibration rows replaced by gross errors.
    pub outliers: Vec<usize>,
}

/// `y = beta0 + beta1 f + sigma e` with standard normal `f` and `e`; the
/// test sample is clean, the calibration sample gets `n_outliers` errors.
pub fn demo_data(
    n_calib: usize,
    n_test: usize,
    beta0: f64,
    beta1: f64,
    sigma: f64,
    n_outliers: usize,
    seed: u64,
) -> ApiResult<DemoData> {
    let unit = NoiseFamily::gaussian(0.0, 1.0).map_err(err)?;
    let draw = |n: usize, stream: u64| -> ApiResult<Sample> {
        let f = noise_sample(&unit, n, Seed(seed).child(2 * stream)).map_err(err)?;
        let e = noise_sample(&unit, n, Seed(seed).child(2 * stream + 1)).map_err(err)?;
        let y = f.iter().zip(&e).map(|(fi, ei)| beta0 + beta1 * fi + sigma * ei).collect();
        Ok(Sample { y, f_hat: f })
    };
    let mut calib = draw(n_calib, 0)?;
    let test = draw(n_test, 1)?;
    let n = calib.y.len() as f64;
    let mean = calib.y.iter().sum::<f64>() / n;
    let sd = (calib.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let (y, mut outliers) = inject_outliers(&calib.y, mean, sd, n_outliers, Seed(seed).child(99)).map_err(err)?;
    outliers.sort_unstable();
    calib.y = y;
    Ok(DemoData { calib, test, outliers })
}

#[derive(Debug, Serialize)]
pub struct Band {
    pub fit: LiftedFit,
    pub r_squared: f64,
    /// Evenly spaced predictions spanning the data, padded by a quarter of the range.
    pub f_hat: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Share of test points inside their interval.
    pub coverage: f64,
    pub levels: Vec<f64>,
    pub empirical: Vec<f64>,
}

pub const RELIABILITY_LEVELS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

/// Interval band over the prediction range plus the reliability curve on
/// the test sample.
pub fn interval_band(
    calib_y: &[f64],
    calib_f: &[f64],
    test_y: &[f64],
    test_f: &[f64],
    alpha: f64,
    points: usize,
) -> ApiResult<Band> {
    let calib = CalibrationSet::new(calib_y.to_vec(), calib_f.to_vec()).map_err(err)?;
    let test = CalibrationSet::new(test_y.to_vec(), test_f.to_vec()).map_err(err)?;
    let fit = fit_lifted_linear(&calib).map_err(err)?;
    let lo = calib_f.iter().chain(test_f).copied().fold(f64::INFINITY, f64::min);
    let hi = calib_f.iter().chain(test_f).copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.25 * (hi - lo);
    let points = points.max(2);
    let grid: Vec<f64> =
        (0..points).map(|i| lo - pad + (hi - lo + 2.0 * pad) * i as f64 / (points - 1) as f64).collect();
    let band = prediction_intervals(&fit, &grid, alpha).map_err(err)?;
    let at_test = prediction_intervals(&fit, test_f, alpha).map_err(err)?;
    let covered = at_test.iter().zip(test_y).filter(|(iv, y)| iv.contains(**y)).count();
    let curve = reliability_curve(&fit, &test, &RELIABILITY_LEVELS).map_err(err)?;
    Ok(Band {
        fit,
        r_squared: fit.r_star * fit.r_star,
        center: band.iter().map(|b| b.center).collect(),
        lower: band.iter().map(|b| b.lower).collect(),
        upper: band.iter().map(|b| b.upper).collect(),
        f_hat: grid,
        coverage: covered as f64 / test_y.len() as f64,
        levels: curve.levels,
        empirical: curve.empirical,
    })
}

#[derive(Debug, Serialize)]
pub struct Flags {
    pub lambda: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub outlier_indices: Vec<usize>,
    pub gamma: Vec<f64>,
}

/// Penalty chosen over a grid on `[0, lambda_max]`.
pub fn find_outliers(y: &[f64], f_hat: &[f64], grid: usize) -> ApiResult<Flags> {
    let calib = CalibrationSet::new(y.to_vec(), f_hat.to_vec()).map_err(err)?;
    let (lambda, sol) = select_lambda(&calib, grid, LambdaCriterion::default()).map_err(err)?;
    Ok(Flags { lambda, beta0: sol.beta0, beta1: sol.beta1, outlier_indices: sol.outlier_indices, gamma: sol.gamma })
}

#[derive(Debug, Deserialize)]
pub struct Model {
    pub label: String,
    pub predictions: Vec<f64>,
}

/// Models ordered by ascending LCD against the responses `y`.
pub fn rank(y: &[f64], models: Vec<Model>, link: &str) -> ApiResult<Vec<RankedModel>> {
    let link: Link = link.parse().map_err(err)?;
    let models: Vec<(String, Vec<f64>)> = models.into_iter().map(|m| (m.label, m.predictions)).collect();
    rank_models(y, &models, link, NullKind::default_for(link)).map_err(err)
}
