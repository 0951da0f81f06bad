//! Calibration diagnostics for arbitrary predictive models.
//!
//! Everything here works from held-out `(response, prediction)` pairs: the
//! lifted linear model and its consistency test, point-wise prediction
//! intervals, the lifted coefficient of determination (LCD) for model
//! ranking, information-criterion mixing, penalized outlier detection and
//! posterior-sampling intervals under non-Gaussian noise.
//!
//! ```
//! use liftcal::{fit_lifted_linear, prediction_interval, CalibrationSet};
//!
//! let calib = CalibrationSet::new(
//!     vec![0.1, 1.2, 1.9, 3.2, 3.9],
//!     vec![0.0, 1.0, 2.0, 3.0, 4.0],
//! )?;
//! let fit = fit_lifted_linear(&calib)?;
//! let band = prediction_interval(&fit, 2.5, 0.05)?;
//! assert!(band.lower < band.center && band.center < band.upper);
//! # Ok::<(), liftcal::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod intervals;
pub mod lcd;
pub mod lifted;
pub mod mcmc;
pub mod outliers;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use intervals::{
    empirical_coverage, eta_hat, mspe_bound_estimate, prediction_interval, prediction_intervals, reliability_curve,
    Interval, Method, ReliabilityCurve,
};
pub use lcd::{
    committee_predict, exp_loss_lcd, fit_lifted_glm, lcd, mic, mic_probabilities, null_loss, rank_models, GlmFit,
    LcdReport, Link, MicScore, NullKind,
};
pub use lifted::{
    consistency_test, consistency_test_with_threshold, fit_lifted_linear, residuals, CalibrationSet, ConsistencyTest,
    LiftedFit,
};
pub use mcmc::{
    chain_diagnostics, log_posterior, predictive_interval_mcmc, sample_posterior, ChainDiagnostics, McmcConfig,
    PosteriorChain,
};
pub use outliers::{
    detect_outliers, haar_dwt, haar_idwt, lambda_max, mad_sigma, select_lambda, soft_threshold, LambdaCriterion,
    OutlierSolution, WaveletDetail,
};
pub use stats::{NoiseFamily, NoiseKind, Seed};
