//! Monte Carlo quantile of the sup-norm of a standard bivariate Student-t.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::{streams, Seed};
use crate::error::{Error, Result};

pub const DEFAULT_LINF_DRAWS: usize = 2_000_000;
const CHUNK: usize = 1 << 16;

/// Radius `T` with `Pr(max(|T1|, |T2|) <= T) ~= 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinfQuantile {
    pub value: f64,
    /// Binomial standard error of the coverage probability at `value`.
    pub coverage_se: f64,
    /// Order-statistic standard error of `value` itself.
    pub quantile_se: f64,
    pub draws: usize,
}

pub fn bivariate_t_linf_quantile(alpha: f64, df: u32, seed: Seed) -> Result<LinfQuantile> {
    bivariate_t_linf_quantile_with_draws(alpha, df, seed, DEFAULT_LINF_DRAWS)
}

pub fn bivariate_t_linf_quantile_with_draws(alpha: f64, df: u32, seed: Seed, draws: usize) -> Result<LinfQuantile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")));
    }
    if df == 0 {
        return Err(Error::InvalidParameter("degrees of freedom must be >= 1".into()));
    }
    if draws < 100 {
        return Err(Error::InvalidParameter("need at least 100 Monte Carlo draws".into()));
    }
    let nu = f64::from(df);
    let chi2 = ChiSquared::new(nu).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let n_chunks = draws.div_ceil(CHUNK);
    let fill = |k: usize| -> Vec<f64> {
        let len = CHUNK.min(draws - k * CHUNK);
        let mut rng = seed.stream((streams::LINF_QUANTILE << 24) + k as u64);
        (0..len)
            .map(|_| {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let w = chi2.sample(&mut rng);
                z1.abs().max(z2.abs()) / (w / nu).sqrt()
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let mut radii: Vec<f64> = {
        use rayon::prelude::*;
        (0..n_chunks).into_par_iter().flat_map_iter(fill).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut radii: Vec<f64> = (0..n_chunks).flat_map(fill).collect();

    radii.sort_unstable_by(f64::total_cmp);
    let n = radii.len() as f64;
    let p = 1.0 - alpha;
    let order = |q: f64| -> f64 {
        let k = (q * n).ceil().clamp(1.0, n) as usize;
        radii[k - 1]
    };
    let coverage_se = (p * alpha / n).sqrt();
    let value = order(p);
    let quantile_se = 0.5 * (order((p + coverage_se).min(1.0)) - order((p - coverage_se).max(0.0)));
    Ok(LinfQuantile { value, coverage_se, quantile_se, draws })
}
