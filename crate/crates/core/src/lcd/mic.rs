use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss-plus-complexity score of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicScore {
    pub model_id: String,
    pub loss: f64,
    pub complexity: f64,
    pub mic: f64,
}

pub fn mic(model_id: impl Into<String>, loss: f64, complexity: f64) -> Result<MicScore> {
    if !(complexity >= 0.0) {
        return Err(Error::InvalidParameter(format!("complexity must be >= 0, got {complexity}")));
    }
    Ok(MicScore { model_id: model_id.into(), loss, complexity, mic: loss + complexity })
}

/// `2q`, which turns MIC into AIC when the loss is `-2 log L`.
pub fn aic_complexity(q: usize) -> f64 {
    2.0 * q as f64
}

/// `q ln n`, the BIC penalty.
pub fn bic_complexity(q: usize, n: usize) -> f64 {
    q as f64 * (n as f64).ln()
}

/// Model weights proportional to `exp(-MIC / 2)`.
pub fn mic_probabilities(scores: &[MicScore]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("no scores".into()));
    }
    if let Some(s) = scores.iter().find(|s| !s.mic.is_finite()) {
        return Err(Error::InvalidInput(format!("MIC of {} is not finite", s.model_id)));
    }
    let best = scores.iter().map(|s| s.mic).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = scores.iter().map(|s| (-(s.mic - best) / 2.0).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Column-wise convex combination of the rows of `predictions`.
pub fn committee_predict(predictions: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("no models".into()));
    }
    if predictions.len() != weights.len() {
        return Err(Error::shape(format!("{} weights", predictions.len()), weights.len()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    let n = predictions[0].len();
    if let Some(row) = predictions.iter().find(|r| r.len() != n) {
        return Err(Error::shape(format!("{n} predictions"), row.len()));
    }
    let mut out = vec![0.0; n];
    for (row, &w) in predictions.iter().zip(weights) {
        for (o, &p) in out.iter_mut().zip(row) {
            *o += w * p;
        }
    }
    // guard rounding so the output stays inside the column range
    for (j, o) in out.iter_mut().enumerate() {
        let (lo, hi) =
            predictions.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
        *o = o.clamp(lo, hi);
    }
    Ok(out)
}
