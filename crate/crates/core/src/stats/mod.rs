//! Distribution numerics and seeded randomness shared by the other modules.

mod dist;
mod linf;
mod noise;
mod rng;
pub mod special;

pub use dist::{normal_cdf, normal_pdf, normal_quantile, t_cdf, t_pdf, t_quantile};
pub use linf::{bivariate_t_linf_quantile, bivariate_t_linf_quantile_with_draws, LinfQuantile, DEFAULT_LINF_DRAWS};
pub use noise::{noise_logpdf, noise_sample, NoiseFamily, NoiseKind, EULER_MASCHERONI};
pub use rng::{streams, Seed};

/// Arithmetic mean; `NaN` for an empty slice.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
