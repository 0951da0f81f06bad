//! Synthetic regression data (Doppler plus damped cosine on interaction
//! paths of ten Gaussian inputs), outlier injection, and simple baseline
//! models.

use std::f64::consts::PI;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{streams, Seed};

pub const N_INPUTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub sigma_eps: f64,
    pub seed: Seed,
    /// `(a, b, c)`
    pub doppler_params: (f64, f64, f64),
    /// `(a, b, c1, c2)`
    pub damcos_params: (f64, f64, f64, f64),
    /// 1-based input indices feeding `z1`, `z2`, `z3`.
    pub active_index_sets: [Vec<usize>; 3],
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 1000,
            sigma_eps: 0.1,
            seed: Seed(0),
            doppler_params: (1.0, 2.1, 0.05),
            damcos_params: (1.75, 0.25, 0.0, 0.0),
            active_index_sets: [(1..=4).collect(), (4..=7).collect(), (7..=10).collect()],
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_eps must be >= 0, got {}", self.sigma_eps)));
        }
        for set in &self.active_index_sets {
            if set.is_empty() {
                return Err(Error::InvalidParameter("active index sets must be nonempty".into()));
            }
            if let Some(j) = set.iter().find(|j| !(1..=N_INPUTS).contains(*j)) {
                return Err(Error::InvalidParameter(format!("input index {j} outside 1..=10")));
            }
        }
        Ok(())
    }

    /// `z_i = sum_{j in I_i} x_j / 10`.
    pub fn interactions(&self, x: &[f64]) -> [f64; 3] {
        let mut z = [0.0; 3];
        for (zi, set) in z.iter_mut().zip(&self.active_index_sets) {
            *zi = set.iter().map(|&j| x[j - 1]).sum::<f64>() / N_INPUTS as f64;
        }
        z
    }

    /// Noise-free response at one input row.
    pub fn truth(&self, x: &[f64]) -> Result<f64> {
        let [z1, z2, z3] = self.interactions(x);
        let (a, b, c) = self.doppler_params;
        let (da, db, c1, c2) = self.damcos_params;
        Ok(doppler(z1, a, b, c)? + damped_cosine(z2, z3, da, db, c1, c2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDataset {
    /// `n` rows of 10 inputs.
    pub predictors: Vec<Vec<f64>>,
    pub responses: Vec<f64>,
    pub truth: Vec<f64>,
}

impl SynthDataset {
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> SynthDataset {
        SynthDataset {
            predictors: idx.iter().map(|&i| self.predictors[i].clone()).collect(),
            responses: idx.iter().map(|&i| self.responses[i]).collect(),
            truth: idx.iter().map(|&i| self.truth[i]).collect(),
        }
    }
}

/// `a sqrt(|z| (1 - |z|)) sin(b pi / (z + c))`, with the radicand clamped at
/// zero so the function vanishes for `|z| > 1`.
pub fn doppler(z: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if z + c == 0.0 {
        return Err(Error::Singularity(format!("doppler pole at z = {z}")));
    }
    let r = (z.abs() * (1.0 - z.abs())).max(0.0);
    Ok(a * r.sqrt() * (b * PI / (z + c)).sin())
}

pub fn damped_cosine(z1: f64, z2: f64, a: f64, b: f64, c1: f64, c2: f64) -> f64 {
    let r = (z1 - c1).hypot(z2 - c2);
    a * (-b * r).exp() * (a * PI * r).cos()
}

pub fn gen_dataset(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let mut rng = config.seed.rng();
    let mut ds = SynthDataset {
        predictors: Vec::with_capacity(config.n),
        responses: Vec::with_capacity(config.n),
        truth: Vec::with_capacity(config.n),
    };
    for _ in 0..config.n {
        let x: Vec<f64> = (0..N_INPUTS).map(|_| rng.sample(StandardNormal)).collect();
        let t = config.truth(&x)?;
        let e: f64 = rng.sample(StandardNormal);
        ds.responses.push(t + config.sigma_eps * e);
        ds.truth.push(t);
        ds.predictors.push(x);
    }
    Ok(ds)
}

/// Replaces `n_out` distinct entries by `mean +- k sd` with `k ~ U(3, 5)`
/// and a fair sign. Returns the new vector and the sorted indices.
pub fn inject_outliers(
    responses: &[f64],
    mean: f64,
    sd: f64,
    n_out: usize,
    seed: Seed,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if n_out > responses.len() {
        return Err(Error::InvalidInput(format!("cannot corrupt {n_out} of {} responses", responses.len())));
    }
    let mut rng = seed.stream(streams::INJECT);
    let mut idx = index::sample(&mut rng, responses.len(), n_out).into_vec();
    idx.sort_unstable();
    let mut y = responses.to_vec();
    for &i in &idx {
        let k: f64 = rng.random_range(3.0..5.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        y[i] = mean + sign * k * sd;
    }
    Ok((y, idx))
}

/// Shuffled 70/20/10 split into train, calibration and test indices.
pub fn split_indices(n: usize, seed: Seed) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed.stream(streams::SPLIT));
    let n_train = n * 7 / 10;
    let n_calib = n * 2 / 10;
    let test = idx.split_off(n_train + n_calib);
    let calib = idx.split_off(n_train);
    (idx, calib, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Mean,
    LinearOls,
    Knn(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePrediction {
    pub predictions: Vec<f64>,
    /// Set when the least-squares normal equations were singular and a
    /// `1e-8` ridge was added.
    pub ridge_fallback: bool,
}

fn check_rows(x: &[Vec<f64>], p: usize, what: &str) -> Result<()> {
    match x.iter().find(|r| r.len() != p) {
        Some(r) => Err(Error::shape(format!("{p} {what} columns"), r.len())),
        None => Ok(()),
    }
}

pub fn baseline_predict(
    kind: Baseline,
    train_x: &[Vec<f64>],
    train_y: &[f64],
    test_x: &[Vec<f64>],
) -> Result<BaselinePrediction> {
    if train_x.len() != train_y.len() {
        return Err(Error::shape(format!("{} training responses", train_x.len()), train_y.len()));
    }
    if train_y.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let p = train_x[0].len();
    check_rows(train_x, p, "training")?;
    check_rows(test_x, p, "test")?;
    match kind {
        Baseline::Mean => {
            let m = train_y.iter().sum::<f64>() / train_y.len() as f64;
            Ok(BaselinePrediction { predictions: vec![m; test_x.len()], ridge_fallback: false })
        }
        Baseline::LinearOls => ols(train_x, train_y, test_x),
        Baseline::Knn(k) => {
            if k == 0 || k > train_y.len() {
                return Err(Error::InvalidParameter(format!("k = {k} outside 1..={}", train_y.len())));
            }
            let one = |q: &Vec<f64>| knn_one(train_x, train_y, q, k);
            #[cfg(feature = "parallel")]
            let predictions = {
                use rayon::prelude::*;
                test_x.par_iter().map(one).collect()
            };
            #[cfg(not(feature = "parallel"))]
            let predictions = test_x.iter().map(one).collect();
            Ok(BaselinePrediction { predictions, ridge_fallback: false })
        }
    }
}

fn knn_one(train_x: &[Vec<f64>], train_y: &[f64], q: &[f64], k: usize) -> f64 {
    let mut d: Vec<(f64, usize)> =
        train_x.iter().enumerate().map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, cmp);
    }
    d[..k].iter().map(|&(_, i)| train_y[i]).sum::<f64>() / k as f64
}

/// Cholesky solve of a symmetric system; `None` if not positive definite.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let p = b.len();
    let mut l = vec![vec![0.0; p]; p];
    let scale = (0..p).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 1e-12 * scale {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        z[i] = (b[i] - (0..i).map(|k| l[i][k] * z[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        x[i] = (z[i] - (i + 1..p).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

fn ols(train_x: &[Vec<f64>], train_y: &[f64], test_x: &[Vec<f64>]) -> Result<BaselinePrediction> {
    let n = train_y.len() as f64;
    let p = train_x[0].len();
    let x_mean: Vec<f64> = (0..p).map(|j| train_x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let y_mean = train_y.iter().sum::<f64>() / n;
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (r, &y) in train_x.iter().zip(train_y) {
        for i in 0..p {
            let di = r[i] - x_mean[i];
            xty[i] += di * (y - y_mean);
            for j in 0..=i {
                xtx[i][j] += di * (r[j] - x_mean[j]);
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for i in 0..p {
        for j in 0..i {
            xtx[j][i] = xtx[i][j];
        }
    }
    let mut ridge_fallback = false;
    let beta = match cholesky_solve(&xtx, &xty) {
        Some(b) => b,
        None => {
            ridge_fallback = true;
            let bump = 1e-8 * (0..p).map(|i| xtx[i][i]).fold(1.0, f64::max);
            for (i, row) in xtx.iter_mut().enumerate() {
                row[i] += bump;
            }
            cholesky_solve(&xtx, &xty)
                .ok_or_else(|| Error::DegenerateDesign("normal equations singular even with ridge".into()))?
        }
    };
    let predictions = test_x
        .iter()
        .map(|r| y_mean + r.iter().zip(&x_mean).zip(&beta).map(|((x, m), b)| (x - m) * b).sum::<f64>())
        .collect();
    Ok(BaselinePrediction { predictions, ridge_fallback })
}
