use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dist::normal_cdf;
use super::rng::Seed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    /// Location-scale Gumbel with CDF `exp(-exp(-(x - mu) / beta))`.
    Gumbel,
}

impl NoiseKind {
    /// Draws one variate with location 0 and scale 1.
    pub fn standard_draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            NoiseKind::Gaussian => rng.sample(StandardNormal),
            NoiseKind::Gumbel => {
                let u: f64 = rng.sample(Open01);
                -(-u.ln()).ln()
            }
        }
    }

    /// Log density with location 0, at standardized point `z`, scale `scale`.
    #[inline]
    pub(crate) fn ln_pdf_standardized(self, z: f64, ln_scale: f64) -> f64 {
        match self {
            NoiseKind::Gaussian => -0.5 * (2.0 * PI).ln() - ln_scale - 0.5 * z * z,
            NoiseKind::Gumbel => -ln_scale - z - (-z).exp(),
        }
    }

    pub fn mean_of_standard(self) -> f64 {
        match self {
            NoiseKind::Gaussian => 0.0,
            NoiseKind::Gumbel => EULER_MASCHERONI,
        }
    }

    pub fn sd_of_standard(self) -> f64 {
        match self {
            NoiseKind::Gaussian => 1.0,
            NoiseKind::Gumbel => PI / 6f64.sqrt(),
        }
    }
}

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// A location-scale noise distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFamily {
    pub kind: NoiseKind,
    pub location: f64,
    pub scale: f64,
}

impl NoiseFamily {
    pub fn new(kind: NoiseKind, location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale must be > 0, got {scale}")));
        }
        if !location.is_finite() {
            return Err(Error::InvalidParameter("noise location must be finite".into()));
        }
        Ok(NoiseFamily { kind, location, scale })
    }

    pub fn gaussian(location: f64, scale: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, location, scale)
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::new(NoiseKind::Gumbel, location, scale)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        match self.kind {
            NoiseKind::Gaussian => normal_cdf(z),
            NoiseKind::Gumbel => (-(-z).exp()).exp(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.location + self.scale * self.kind.mean_of_standard()
    }
}

/// Log density of `family` at `u`.
pub fn noise_logpdf(u: f64, family: &NoiseFamily) -> Result<f64> {
    if !(family.scale > 0.0) {
        return Err(Error::InvalidParameter(format!("noise scale must be > 0, got {}", family.scale)));
    }
    let z = (u - family.location) / family.scale;
    Ok(family.kind.ln_pdf_standardized(z, family.scale.ln()))
}

/// `n` i.i.d. draws from `family`, deterministic in `seed`.
pub fn noise_sample(family: &NoiseFamily, n: usize, seed: Seed) -> Result<Vec<f64>> {
    if !(family.scale > 0.0) {
        return Err(Error::InvalidParameter(format!("noise scale must be > 0, got {}", family.scale)));
    }
    let mut rng = seed.rng();
    Ok((0..n).map(|_| family.location + family.scale * family.kind.standard_draw(&mut rng)).collect())
}
