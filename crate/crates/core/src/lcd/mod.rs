//! Lifted coefficient of determination (LCD), model ranking and
//! information-criterion mixing.

mod glm;
mod mic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifted::{is_constant, CalibrationSet};
use crate::stats::mean;

pub use glm::{fit_lifted_glm, GlmFit};
pub use mic::{aic_complexity, bic_complexity, committee_predict, mic, mic_probabilities, MicScore};

use glm::{covariate, fit_core, intercept_mle, Loss};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// Squared-error loss on the raw predictions.
    Identity,
    /// Binary cross-entropy on `logit(f_hat)`.
    Logit,
    /// Poisson deviance on `ln(f_hat)`.
    Log,
}

impl FromStr for Link {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Link::Identity),
            "logit" => Ok(Link::Logit),
            "log" => Ok(Link::Log),
            _ => Err(Error::InvalidParameter(format!("unknown link {s:?}"))),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Identity => "identity",
            Link::Logit => "logit",
            Link::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullKind {
    /// Constant probability 1/2 (binary responses only).
    UniformBinary,
    /// Intercept-only maximum-likelihood fit.
    InterceptMle,
}

impl NullKind {
    pub fn default_for(link: Link) -> NullKind {
        match link {
            Link::Logit => NullKind::UniformBinary,
            _ => NullKind::InterceptMle,
        }
    }
}

impl FromStr for NullKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NullKind::UniformBinary),
            "intercept" => Ok(NullKind::InterceptMle),
            _ => Err(Error::InvalidParameter(format!("unknown null model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcdReport {
    pub model_id: String,
    pub lcd: f64,
    pub model_loss: f64,
    pub null_loss: f64,
    pub lift: GlmFit,
    pub n_calb: usize,
}

impl LcdReport {
    /// Likelihood-ratio variant `1 - exp(2 (L_model - L_null) / n)`; on
    /// binary data with the uniform null it cannot exceed 3/4.
    pub fn exp_loss_lcd(&self) -> f64 {
        exp_loss_lcd(self)
    }
}

pub fn exp_loss_lcd(report: &LcdReport) -> f64 {
    -(2.0 * (report.model_loss - report.null_loss) / report.n_calb as f64).exp_m1()
}

/// Loss of the null model on the calibration responses.
pub fn null_loss(calib: &CalibrationSet, link: Link, null_kind: NullKind) -> Result<f64> {
    covariate(calib, link)?;
    let y = calib.responses();
    let eta = match null_kind {
        NullKind::UniformBinary => {
            if link != Link::Logit {
                return Err(Error::InvalidParameter("the uniform null needs the logit link".into()));
            }
            0.0
        }
        NullKind::InterceptMle => intercept_mle(y, link).ok_or(Error::BoundaryNull { mean: mean(y) })?,
    };
    Ok(Loss::new(link).value(y, std::iter::repeat(eta)))
}

/// LCD of the predictions in `calib`: `1 - L(lifted model) / L(null)`.
///
/// A constant prediction vector carries no information beyond the
/// intercept, so it is scored with an intercept-only lift rather than
/// rejected.
pub fn lcd(calib: &CalibrationSet, link: Link, null_kind: NullKind) -> Result<LcdReport> {
    lcd_labeled("model", calib, link, null_kind)
}

fn lcd_labeled(label: &str, calib: &CalibrationSet, link: Link, null_kind: NullKind) -> Result<LcdReport> {
    if calib.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: calib.len() });
    }
    let x = covariate(calib, link)?;
    let null = null_loss(calib, link, null_kind)?;
    if null == 0.0 {
        return Err(Error::UndefinedLcd);
    }
    let m = mean(&x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let lift = fit_core(calib, link, &x, is_constant(&x, ss));
    Ok(LcdReport {
        model_id: label.to_string(),
        lcd: 1.0 - lift.loss / null,
        model_loss: lift.loss,
        null_loss: null,
        lift,
        n_calb: calib.len(),
    })
}

/// One entry of a model ranking; failed models keep their error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub model_id: String,
    pub report: Option<LcdReport>,
    pub error: Option<String>,
}

/// Scores every model on the same calibration responses and returns them
/// ordered by ascending LCD (ties by label), failures last.
pub fn rank_models(
    responses: &[f64],
    models: &[(String, Vec<f64>)],
    link: Link,
    null_kind: NullKind,
) -> Result<Vec<RankedModel>> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no models to rank".into()));
    }
    let score = |(label, preds): &(String, Vec<f64>)| {
        let outcome = CalibrationSet::new(responses.to_vec(), preds.clone())
            .and_then(|c| lcd_labeled(label, &c, link, null_kind));
        match outcome {
            Ok(r) => RankedModel { model_id: label.clone(), report: Some(r), error: None },
            Err(e) => RankedModel { model_id: label.clone(), report: None, error: Some(e.to_string()) },
        }
    };
    #[cfg(feature = "parallel")]
    let mut ranked: Vec<RankedModel> = {
        use rayon::prelude::*;
        models.par_iter().map(score).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut ranked: Vec<RankedModel> = models.iter().map(score).collect();

    ranked.sort_by(|a, b| match (&a.report, &b.report) {
        (Some(x), Some(y)) => x.lcd.total_cmp(&y.lcd).then_with(|| a.model_id.cmp(&b.model_id)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.model_id.cmp(&b.model_id),
    });
    Ok(ranked)
}
