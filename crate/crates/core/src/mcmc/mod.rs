//! Posterior sampling for the lifted model under a chosen noise family, and
//! predictive intervals from the sampled parameters.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Interval, Method};
use crate::lifted::{fit_lifted_linear, CalibrationSet};
use crate::stats::{median, streams, NoiseKind, Seed};

const ADAPT_BATCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Retained draws, summed over chains.
    pub m_samples: usize,
    /// Adaptation sweeps discarded at the start of every chain.
    pub burn_in: usize,
    pub target_acceptance: f64,
    pub seed: Seed,
    pub n_chains: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig { m_samples: 20_000, burn_in: 5_000, target_acceptance: 0.234, seed: Seed(0), n_chains: 4 }
    }
}

impl McmcConfig {
    fn validate(&self) -> Result<()> {
        if self.m_samples < 100 {
            return Err(Error::InvalidParameter("need at least 100 posterior samples".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidParameter("need at least one chain".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidParameter("target acceptance must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Retained draws of `(beta0, beta1, ln scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub samples: Vec<[f64; 3]>,
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub family: NoiseKind,
    pub seed: Seed,
}

impl PosteriorChain {
    /// Wraps externally produced draws.
    pub fn from_samples(samples: Vec<[f64; 3]>, family: NoiseKind) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientSamples("empty chain".into()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("chain contains non-finite draws".into()));
        }
        Ok(PosteriorChain { samples, acceptance_rate: 1.0, burn_in: 0, family, seed: Seed(0) })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Posterior mean of each coordinate.
    pub fn means(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for s in &self.samples {
            for j in 0..3 {
                m[j] += s[j];
            }
        }
        m.map(|v| v / self.samples.len() as f64)
    }
}

/// Log posterior under flat priors on `(beta0, beta1, scale)`, expressed in
/// `ln scale` (hence the `+ ln scale` Jacobian).
pub fn log_posterior(params: [f64; 3], data: &CalibrationSet, family: NoiseKind) -> f64 {
    let [b0, b1, s] = params;
    let inv = (-s).exp();
    let ll: f64 = data
        .responses()
        .iter()
        .zip(data.predictions())
        .map(|(&y, &f)| family.ln_pdf_standardized((y - b0 - b1 * f) * inv, s))
        .sum();
    ll + s
}

/// Same density on centered predictions `d = f - f_mean`, intercept
/// `c = beta0 + beta1 f_mean`.
struct Target<'a> {
    y: &'a [f64],
    d: Vec<f64>,
    family: NoiseKind,
}

impl Target<'_> {
    fn log_post(&self, p: [f64; 3]) -> f64 {
        let [c, b1, s] = p;
        let inv = (-s).exp();
        let ll: f64 =
            self.y.iter().zip(&self.d).map(|(&y, &d)| self.family.ln_pdf_standardized((y - c - b1 * d) * inv, s)).sum();
        ll + s
    }
}

struct ChainRun {
    samples: Vec<[f64; 3]>,
    accepted: usize,
    proposed: usize,
}

fn run_chain(target: &Target, start: [f64; 3], steps0: [f64; 3], keep: usize, cfg: &McmcConfig, k: usize) -> ChainRun {
    let mut rng = cfg.seed.stream(streams::CHAIN_BASE + k as u64);
    let mut x = start;
    let mut lp = target.log_post(x);
    let mut log_step = steps0.map(f64::ln);
    let mut batch_acc = [0usize; 3];
    let mut run = ChainRun { samples: Vec::with_capacity(keep), accepted: 0, proposed: 0 };
    for it in 0..cfg.burn_in + keep {
        let adapting = it < cfg.burn_in;
        for j in 0..3 {
            let z: f64 = rng.sample(StandardNormal);
            let mut prop = x;
            prop[j] += log_step[j].exp() * z;
            let lp_prop = target.log_post(prop);
            let u: f64 = rng.random();
            let accept = lp_prop.is_finite() && u.ln() < lp_prop - lp;
            if accept {
                x = prop;
                lp = lp_prop;
            }
            if adapting {
                batch_acc[j] += accept as usize;
            } else {
                run.proposed += 1;
                run.accepted += accept as usize;
            }
        }
        if adapting && (it + 1) % ADAPT_BATCH == 0 {
            let round = ((it + 1) / ADAPT_BATCH) as f64;
            for j in 0..3 {
                let rate = batch_acc[j] as f64 / ADAPT_BATCH as f64;
                log_step[j] += 3.0 * (rate - cfg.target_acceptance) / round.sqrt();
                batch_acc[j] = 0;
            }
        }
        if !adapting {
            run.samples.push(x);
        }
    }
    run
}

/// Component-wise random-walk Metropolis started at the least-squares fit.
/// Step sizes adapt toward `target_acceptance` during burn-in and are then
/// frozen. Chains run on disjoint random streams and are concatenated.
pub fn sample_posterior(data: &CalibrationSet, family: NoiseKind, config: &McmcConfig) -> Result<PosteriorChain> {
    config.validate()?;
    if data.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.len() });
    }
    let fit = fit_lifted_linear(data)?;
    if fit.sigma_u_hat == 0.0 {
        return Err(Error::DegenerateDesign("exact calibration fit; the scale posterior is improper".into()));
    }
    let n = data.len() as f64;
    let scale = fit.sigma_u_hat / family.sd_of_standard();
    let c0 = fit.y_mean - scale * family.mean_of_standard();
    let start = [c0, fit.beta1_hat, scale.ln()];
    let (_, se1) = fit.std_errors();
    let steps0 = [2.4 * fit.sigma_u_hat / n.sqrt(), 2.4 * se1, 2.4 / (2.0 * n).sqrt()];
    let target = Target { y: data.responses(), d: data.predictions().iter().map(|f| f - fit.mu_hat).collect(), family };

    let per_chain = config.m_samples.div_ceil(config.n_chains);
    let one = |k: usize| run_chain(&target, start, steps0, per_chain, config, k);
    #[cfg(feature = "parallel")]
    let runs: Vec<ChainRun> = {
        use rayon::prelude::*;
        (0..config.n_chains).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<ChainRun> = (0..config.n_chains).map(one).collect();

    let proposed: usize = runs.iter().map(|r| r.proposed).sum();
    let accepted: usize = runs.iter().map(|r| r.accepted).sum();
    let acceptance_rate = accepted as f64 / proposed as f64;
    if acceptance_rate < 0.01 {
        return Err(Error::TuningFailure { acceptance: acceptance_rate });
    }
    let mu = fit.mu_hat;
    let samples: Vec<[f64; 3]> = runs
        .into_iter()
        .flat_map(|r| r.samples)
        .take(config.m_samples)
        .map(|[c, b1, s]| [c - b1 * mu, b1, s])
        .collect();
    Ok(PosteriorChain { samples, acceptance_rate, burn_in: config.burn_in, family, seed: config.seed })
}

/// Equal-tailed predictive interval at `f0`: one fresh noise draw per
/// retained parameter draw, then empirical quantiles. The chain itself is
/// left untouched, so one chain serves every test point.
pub fn predictive_interval_mcmc(chain: &PosteriorChain, f0: f64, alpha: f64, seed: Seed) -> Result<Interval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")));
    }
    let m = chain.samples.len();
    if (m as f64) * alpha / 2.0 < 1.0 {
        return Err(Error::InsufficientSamples(format!("{m} draws cannot resolve the {alpha} tails")));
    }
    let mut rng = seed.stream(streams::PREDICTIVE_NOISE);
    let mut draws: Vec<f64> = chain
        .samples
        .iter()
        .map(|&[b0, b1, s]| b0 + b1 * f0 + s.exp() * chain.family.standard_draw(&mut rng))
        .collect();
    let center = median(&draws);
    draws.sort_unstable_by(f64::total_cmp);
    let mf = m as f64;
    let lo = ((alpha / 2.0 * mf).floor() as usize).max(1);
    let hi = (((1.0 - alpha / 2.0) * mf).floor() as usize).clamp(lo, m);
    Ok(Interval { center, lower: draws[lo - 1], upper: draws[hi - 1], level: 1.0 - alpha, method: Method::Mcmc })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: f64,
    /// Effective sample size of `beta0`, `beta1`, `ln scale`.
    pub ess: [f64; 3],
}

/// Effective sample size by Geyer's initial positive sequence, clamped to
/// `[1, M]`.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let m = x.len();
    let mf = m as f64;
    let mean = x.iter().sum::<f64>() / mf;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|v| v * v).sum::<f64>() / mf;
    if var <= 0.0 {
        return 1.0;
    }
    let rho = |k: usize| c[..m - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / mf / var;
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < m {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    (mf / tau).clamp(1.0, mf)
}

pub fn chain_diagnostics(chain: &PosteriorChain) -> Result<ChainDiagnostics> {
    if chain.samples.len() < 10 {
        return Err(Error::InsufficientSamples("diagnostics need at least 10 draws".into()));
    }
    let ess = [0, 1, 2].map(|j| {
        let col: Vec<f64> = chain.samples.iter().map(|s| s[j]).collect();
        effective_sample_size(&col)
    });
    Ok(ChainDiagnostics { acceptance_rate: chain.acceptance_rate, ess })
}
