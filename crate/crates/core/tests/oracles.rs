mod common;

use common::{glm_grid_oracle, OracleLink};
use liftcal::lcd::{fit_lifted_glm, lcd, Link, NullKind};
use liftcal::mcmc::{predictive_interval_mcmc, sample_posterior, McmcConfig};
use liftcal::stats::{bivariate_t_linf_quantile, NoiseKind, Seed};
use liftcal::synth::{gen_dataset, SynthConfig};
use liftcal::{fit_lifted_linear, haar_dwt, lambda_max, mad_sigma, prediction_interval, CalibrationSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

#[test]
fn glm_fits_reach_grid_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in 0..5 {
        let n = 80;
        let x = normals(&mut rng, n);
        let (b0, b1) = (rng.random_range(-0.5..0.5), rng.random_range(0.3..1.5));

        let y: Vec<f64> = x.iter().map(|v| b0 + b1 * v + 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
        let calib = CalibrationSet::new(y.clone(), x.clone()).unwrap();
        let fit = fit_lifted_glm(&calib, Link::Identity).unwrap();
        let grid = glm_grid_oracle(OracleLink::Identity, &y, &x, (fit.beta0, fit.beta1), 2.0);
        assert!(fit.loss <= grid + 1e-9 * grid, "identity model {model}: {} vs {grid}", fit.loss);

        let p: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect();
        let yb: Vec<f64> =
            x.iter().map(|v| f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-(b0 + b1 * v)).exp()))).collect();
        let calib = CalibrationSet::new(yb.clone(), p.clone()).unwrap();
        let fit = fit_lifted_glm(&calib, Link::Logit).unwrap();
        let grid = glm_grid_oracle(OracleLink::Logit, &yb, &p, (fit.beta0, fit.beta1), 2.0);
        assert!(fit.loss <= grid + 1e-9 * grid, "logit model {model}: {} vs {grid}", fit.loss);

        let mu: Vec<f64> = x.iter().map(|v| (0.5 * v).exp()).collect();
        let yc: Vec<f64> = mu
            .iter()
            .map(|m| {
                // Poisson by inversion
                let rate = (b0 + b1 * m.ln()).exp();
                let (mut k, mut term, u) = (0.0, (-rate).exp(), rng.random::<f64>());
                let mut cdf = term;
                while u > cdf && k < 200.0 {
                    k += 1.0;
                    term *= rate / k;
                    cdf += term;
                }
                k
            })
            .collect();
        let calib = CalibrationSet::new(yc.clone(), mu.clone()).unwrap();
        let fit = fit_lifted_glm(&calib, Link::Log).unwrap();
        let grid = glm_grid_oracle(OracleLink::Log, &yc, &mu, (fit.beta0, fit.beta1), 2.0);
        assert!(fit.loss <= grid + 1e-9 * grid.abs(), "log model {model}: {} vs {grid}", fit.loss);
        let report = lcd(&calib, Link::Log, NullKind::InterceptMle).unwrap();
        assert!((0.0..=1.0).contains(&report.lcd));
    }
}

#[test]
fn linf_quantile_matches_brute_force() {
    let lib = bivariate_t_linf_quantile(0.05, 20, Seed(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let chi = ChiSquared::<f64>::new(20.0).unwrap();
    let draws = 10_000_000;
    let mut radii: Vec<f64> = (0..draws)
        .map(|_| {
            let w: f64 = chi.sample(&mut rng);
            let s = (w / 20.0).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            a.abs().max(b.abs()) / s
        })
        .collect();
    let k = (0.95 * draws as f64) as usize;
    let (_, oracle, _) = radii.select_nth_unstable_by(k, f64::total_cmp);
    let gap = (lib.value - *oracle).abs();
    assert!(gap <= 3.0 * lib.quantile_se * 1.2f64.sqrt(), "lib {} oracle {oracle} se {}", lib.value, lib.quantile_se);
}

#[test]
fn mad_recovers_gaussian_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = 2.5;
    let x: Vec<f64> = normals(&mut rng, 1 << 17).into_iter().map(|v| sigma * v).collect();
    let w = haar_dwt(&x).unwrap();
    let est = mad_sigma(w.finest()).unwrap();
    assert!((est / sigma - 1.0).abs() <= 0.02, "{est}");
}

#[test]
fn lambda_max_is_universal_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 4096;
    let sigma = 0.8;
    let f = normals(&mut rng, n);
    let y: Vec<f64> = f.iter().map(|v| 1.0 + 2.0 * v + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    let calib = CalibrationSet::new(y, f).unwrap();
    let fit = fit_lifted_linear(&calib).unwrap();
    let lm = lambda_max(&calib, &fit).unwrap();
    let expected = sigma * (2.0 * (n as f64).ln()).sqrt();
    assert!((lm / expected - 1.0).abs() <= 0.05, "{lm} vs {expected}");
}

fn gaussian_calibration(n: usize, seed: u64) -> CalibrationSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = normals(&mut rng, n);
    let y = f.iter().map(|v| 0.2 + 0.9 * v + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    CalibrationSet::new(y, f).unwrap()
}

#[test]
fn long_chain_converges_to_student_t() {
    let data = gaussian_calibration(200, 3);
    let config = McmcConfig { m_samples: 100_000, seed: Seed(17), ..McmcConfig::default() };
    let chain = sample_posterior(&data, NoiseKind::Gaussian, &config).unwrap();
    let fit = fit_lifted_linear(&data).unwrap();
    for f0 in [-1.0, 0.0, 1.0] {
        let m = predictive_interval_mcmc(&chain, f0, 0.05, Seed(8)).unwrap();
        let t = prediction_interval(&fit, f0, 0.05).unwrap();
        let gap = (m.width() / t.width() - 1.0).abs();
        assert!(gap <= 0.02, "f0={f0} gap={gap}");
    }
}

#[test]
fn one_chain_serves_every_test_point() {
    let data = gaussian_calibration(100, 4);
    let config = McmcConfig { m_samples: 4000, burn_in: 1000, seed: Seed(2), ..McmcConfig::default() };
    let chain = sample_posterior(&data, NoiseKind::Gumbel, &config).unwrap();
    let before = chain.clone();
    let first = predictive_interval_mcmc(&chain, 0.3, 0.1, Seed(1)).unwrap();
    for f0 in [-2.0, 0.0, 2.0] {
        predictive_interval_mcmc(&chain, f0, 0.1, Seed(1)).unwrap();
    }
    assert_eq!(chain, before);
    assert_eq!(predictive_interval_mcmc(&chain, 0.3, 0.1, Seed(1)).unwrap(), first);
}

#[test]
fn slope_error_shrinks_with_prediction_noise() {
    let n = 1000;
    let taus = [1.0, 0.03];
    let mut medians = Vec::new();
    for tau in taus {
        let mut errs: Vec<f64> = (0..50)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
                let f: Vec<f64> = (0..n).map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal)).collect();
                let y: Vec<f64> = f.iter().map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
                let fhat: Vec<f64> = f.iter().map(|v| v + tau * rng.sample::<f64, _>(StandardNormal)).collect();
                let fit = fit_lifted_linear(&CalibrationSet::new(y, fhat).unwrap()).unwrap();
                (fit.beta1_hat - 1.0).abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push(0.5 * (errs[24] + errs[25]));
    }
    assert!(medians[1] < medians[0], "{medians:?}");
    assert!(medians[1] <= 0.05, "{medians:?}");
}

#[test]
fn generator_is_deterministic() {
    let config = SynthConfig { n: 300, seed: Seed(7), ..SynthConfig::default() };
    let a = gen_dataset(&config).unwrap();
    let b = gen_dataset(&config).unwrap();
    assert_eq!(a.responses, b.responses);
    assert_eq!(a.predictors, b.predictors);
    let c = gen_dataset(&SynthConfig { seed: Seed(8), ..config }).unwrap();
    assert_ne!(a.responses, c.responses);
}
