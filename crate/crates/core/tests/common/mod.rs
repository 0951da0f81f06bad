//! Reference implementations used only to check the library. They share no
//! code with it.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

/// Simple regression by solving the raw 2x2 normal equations.
pub fn ols_oracle(y: &[f64], f: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let sf: f64 = f.iter().sum();
    let sff: f64 = f.iter().map(|v| v * v).sum();
    let sy: f64 = y.iter().sum();
    let sfy: f64 = f.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sff - sf * sf;
    ((sff * sy - sf * sfy) / det, (n * sfy - sf * sy) / det)
}

/// Quantile by bisection on the incomplete-beta Student-t CDF.
pub fn t_quantile_oracle(p: f64, df: u32) -> f64 {
    let d = StudentsT::new(0.0, 1.0, f64::from(df)).unwrap();
    let (mut lo, mut hi) = (-1e8, 1e8);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if d.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn t_cdf_oracle(x: f64, df: u32) -> f64 {
    StudentsT::new(0.0, 1.0, f64::from(df)).unwrap().cdf(x)
}

/// `0.5 * ||y - b0 - b1 f - g||^2 + lambda ||g||_1` minimized by FISTA on
/// the offsets alone, with the regression coefficients profiled out by
/// projection. Restarts whenever the objective rises.
pub fn lasso_offsets_oracle(y: &[f64], f: &[f64], lambda: f64, max_iter: usize) -> (f64, Vec<f64>) {
    let n = y.len();
    let project = |v: &[f64]| -> Vec<f64> {
        let (b0, b1) = ols_oracle(v, f);
        v.iter().zip(f).map(|(vi, fi)| vi - b0 - b1 * fi).collect()
    };
    let objective = |g: &[f64]| -> f64 {
        let v: Vec<f64> = y.iter().zip(g).map(|(a, b)| a - b).collect();
        let r = project(&v);
        0.5 * r.iter().map(|x| x * x).sum::<f64>() + lambda * g.iter().map(|x| x.abs()).sum::<f64>()
    };
    let soft = |u: f64| u.signum() * (u.abs() - lambda).max(0.0);
    let mut g = vec![0.0; n];
    let mut z = g.clone();
    let mut t = 1.0f64;
    let mut obj = objective(&g);
    for _ in 0..max_iter {
        // gradient of the smooth part in g is -P(y - g); the projection has Lipschitz constant 1
        let v: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
        let r = project(&v);
        let next: Vec<f64> = z.iter().zip(&r).map(|(zi, ri)| soft(zi + ri)).collect();
        let next_obj = objective(&next);
        if next_obj > obj {
            if z == g {
                break;
            }
            z = g.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let step: f64 = next.iter().zip(&g).map(|(a, b)| (a - b).abs()).sum();
        z = next.iter().zip(&g).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        g = next;
        t = t_next;
        obj = next_obj;
        if step <= 1e-15 {
            break;
        }
    }
    (obj, g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleLink {
    Identity,
    Logit,
    Log,
}

/// Uncapped calibration loss of a lifted GLM at `(b0, b1)`.
pub fn glm_loss_oracle(link: OracleLink, y: &[f64], f: &[f64], b0: f64, b1: f64) -> f64 {
    y.iter()
        .zip(f)
        .map(|(&yi, &fi)| match link {
            OracleLink::Identity => (yi - b0 - b1 * fi).powi(2),
            OracleLink::Logit => {
                let p = fi.clamp(1e-12, 1.0 - 1e-12);
                let eta = b0 + b1 * (p / (1.0 - p)).ln();
                // -log sigmoid((2y - 1) eta)
                let m = (2.0 * yi - 1.0) * eta;
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            OracleLink::Log => {
                let eta = b0 + b1 * fi.ln();
                eta.exp() - yi * eta + ln_gamma(yi + 1.0)
            }
        })
        .sum()
}

/// Minimum of the oracle loss over a zooming 2-D grid.
pub fn glm_grid_oracle(link: OracleLink, y: &[f64], f: &[f64], centre: (f64, f64), half: f64) -> f64 {
    let (mut c0, mut c1, mut h) = (centre.0, centre.1, half);
    let mut best = glm_loss_oracle(link, y, f, c0, c1);
    for _ in 0..40 {
        let (mut b0b, mut b1b) = (c0, c1);
        for i in -20..=20 {
            for j in -20..=20 {
                let b0 = c0 + h * f64::from(i) / 20.0;
                let b1 = c1 + h * f64::from(j) / 20.0;
                let v = glm_loss_oracle(link, y, f, b0, b1);
                if v < best {
                    best = v;
                    b0b = b0;
                    b1b = b1;
                }
            }
        }
        c0 = b0b;
        c1 = b1b;
        h *= 0.5;
    }
    best
}
