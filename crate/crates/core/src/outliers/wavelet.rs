use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::median;

/// Orthonormal Haar coefficients laid out coarse to fine:
/// `[approximation, level-1 detail, level-2 details (2), ..., finest (n/2)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDetail {
    pub coefficients: Vec<f64>,
}

impl WaveletDetail {
    /// Finest-scale detail coefficients, the last half of the vector.
    pub fn finest(&self) -> &[f64] {
        &self.coefficients[self.coefficients.len() / 2..]
    }
}

fn check_pow2(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::shape("a power-of-two length >= 2", n));
    }
    Ok(())
}

pub fn haar_dwt(x: &[f64]) -> Result<WaveletDetail> {
    check_pow2(x.len())?;
    let mut out = x.to_vec();
    let mut scratch = vec![0.0; x.len()];
    let mut len = x.len();
    while len > 1 {
        let half = len / 2;
        for k in 0..half {
            let (a, b) = (out[2 * k], out[2 * k + 1]);
            scratch[k] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + k] = (a - b) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
    Ok(WaveletDetail { coefficients: out })
}

pub fn haar_idwt(w: &WaveletDetail) -> Result<Vec<f64>> {
    let n = w.coefficients.len();
    check_pow2(n)?;
    let mut out = w.coefficients.clone();
    let mut scratch = vec![0.0; n];
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for k in 0..half {
            let (a, d) = (out[k], out[half + k]);
            scratch[2 * k] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * k + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len *= 2;
    }
    Ok(out)
}

/// The trailing block of the largest power-of-two length.
pub fn truncate_pow2(x: &[f64]) -> &[f64] {
    if x.is_empty() {
        return x;
    }
    let m = 1usize << (usize::BITS - 1 - x.len().leading_zeros());
    &x[x.len() - m..]
}

/// Median absolute deviation rescaled to a Gaussian standard deviation.
pub fn mad_sigma(details: &[f64]) -> Result<f64> {
    if details.is_empty() {
        return Err(Error::InvalidInput("no coefficients for the MAD estimate".into()));
    }
    let m = median(details);
    let dev: Vec<f64> = details.iter().map(|d| (d - m).abs()).collect();
    Ok(median(&dev) / 0.6745)
}
