//! Two-parameter lifted GLM fits by damped Newton iterations.

use serde::{Deserialize, Serialize};

use super::Link;
use crate::error::{Error, Result};
use crate::lifted::{is_constant, CalibrationSet};
use crate::stats::{mean, special::ln_gamma};

pub(crate) const PROB_CLIP: f64 = 1e-12;
pub(crate) const ETA_CAP: f64 = 30.0;
const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-10;
const REPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub beta0: f64,
    pub beta1: f64,
    /// Calibration loss at `(beta0, beta1)`.
    pub loss: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Link-specific per-observation loss with its first two derivatives in the
/// linear predictor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Loss {
    link: Link,
}

impl Loss {
    pub(crate) fn new(link: Link) -> Self {
        Loss { link }
    }

    /// `(loss, d/d eta, d2/d eta2, capped)`
    #[inline]
    fn eval(self, y: f64, eta: f64) -> (f64, f64, f64, bool) {
        match self.link {
            Link::Identity => {
                let r = y - eta;
                (r * r, -2.0 * r, 2.0, false)
            }
            Link::Logit => {
                let s = 2.0 * y - 1.0;
                let m = s * eta;
                if m >= ETA_CAP {
                    return (softplus(-ETA_CAP), 0.0, 0.0, true);
                }
                let p = sigmoid(-m);
                (softplus(-m), -s * p, p * (1.0 - p), false)
            }
            Link::Log => {
                let c = log_factorial(y);
                if y == 0.0 && eta <= -ETA_CAP {
                    return ((-ETA_CAP).exp(), 0.0, 0.0, true);
                }
                let mu = eta.exp();
                (mu - y * eta + c, mu - y, mu, false)
            }
        }
    }

    pub(crate) fn value(self, y: &[f64], eta: impl Iterator<Item = f64>) -> f64 {
        y.iter().zip(eta).map(|(&yi, e)| self.eval(yi, e).0).sum()
    }
}

fn log_factorial(y: f64) -> f64 {
    if y <= 1.0 {
        0.0
    } else {
        ln_gamma(y + 1.0)
    }
}

#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Checks the response and prediction domains and returns the transformed
/// covariate `g(f_hat)`.
pub(crate) fn covariate(calib: &CalibrationSet, link: Link) -> Result<Vec<f64>> {
    let (y, f) = (calib.responses(), calib.predictions());
    match link {
        Link::Identity => Ok(f.to_vec()),
        Link::Logit => {
            if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidInput(format!("logit link needs 0/1 responses; row {i} is {}", y[i])));
            }
            if let Some(i) = f.iter().position(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidInput(format!("logit link needs probabilities; prediction {i} is {}", f[i])));
            }
            Ok(f.iter().map(|&p| logit(p.clamp(PROB_CLIP, 1.0 - PROB_CLIP))).collect())
        }
        Link::Log => {
            if let Some(i) = y.iter().position(|&v| v < 0.0 || v.fract() != 0.0) {
                return Err(Error::InvalidInput(format!("log link needs count responses; row {i} is {}", y[i])));
            }
            if let Some(i) = f.iter().position(|&v| v <= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "log link needs positive predictions; prediction {i} is {}",
                    f[i]
                )));
            }
            Ok(f.iter().map(|v| v.ln()).collect())
        }
    }
}

/// Intercept of the intercept-only maximum-likelihood fit, if it exists.
pub(crate) fn intercept_mle(y: &[f64], link: Link) -> Option<f64> {
    let m = mean(y);
    match link {
        Link::Identity => Some(m),
        Link::Logit if m > 0.0 && m < 1.0 => Some(logit(m)),
        // an all-zero count response has its null at the capped linear predictor
        Link::Log => Some(if m > 0.0 { m.ln() } else { -ETA_CAP }),
        _ => None,
    }
}

struct Problem<'a> {
    y: &'a [f64],
    /// Centered covariate.
    d: Vec<f64>,
    x_mean: f64,
    loss: Loss,
}

struct State {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
    capped: bool,
}

impl Problem<'_> {
    fn eval(&self, c: [f64; 2]) -> State {
        let mut s = State { value: 0.0, grad: [0.0; 2], hess: [[0.0; 2]; 2], capped: false };
        for (&yi, &di) in self.y.iter().zip(&self.d) {
            let (l, g, h, cap) = self.loss.eval(yi, c[0] + c[1] * di);
            s.value += l;
            s.grad[0] += g;
            s.grad[1] += g * di;
            s.hess[0][0] += h;
            s.hess[0][1] += h * di;
            s.hess[1][1] += h * di * di;
            s.capped |= cap;
        }
        s.hess[1][0] = s.hess[0][1];
        s
    }

    fn value(&self, c: [f64; 2]) -> f64 {
        self.loss.value(self.y, self.d.iter().map(|&di| c[0] + c[1] * di))
    }

    fn to_centered(&self, beta0: f64, beta1: f64) -> [f64; 2] {
        [beta0 + beta1 * self.x_mean, beta1]
    }

    fn newton_direction(s: &State) -> [f64; 2] {
        let [[a, b], [_, d]] = s.hess;
        let det = a * d - b * b;
        let g = s.grad;
        if det > 1e-12 * a * d && det.is_finite() {
            return [-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
        }
        // singular curvature: coordinate-wise Newton where possible, gradient otherwise
        let step = |gi: f64, hi: f64| if hi > 0.0 { -gi / hi } else { -gi };
        [step(g[0], a), step(g[1], d)]
    }

    fn minimize(&self, start: [f64; 2]) -> (State, [f64; 2], usize) {
        let n = self.y.len() as f64;
        let mut c = start;
        let mut s = self.eval(c);
        let mut iterations = 0;
        while iterations < MAX_ITER {
            let gmax = s.grad[0].abs().max(s.grad[1].abs());
            if gmax / n <= GRAD_TOL {
                break;
            }
            iterations += 1;
            let mut dir = Self::newton_direction(&s);
            let mut slope = s.grad[0] * dir[0] + s.grad[1] * dir[1];
            if !(slope < 0.0) {
                dir = [-s.grad[0], -s.grad[1]];
                slope = -(s.grad[0] * s.grad[0] + s.grad[1] * s.grad[1]);
            }
            let mut t = 1.0;
            let mut next = None;
            for _ in 0..60 {
                let cand = [c[0] + t * dir[0], c[1] + t * dir[1]];
                let v = self.value(cand);
                if v.is_finite() && v <= s.value + 1e-4 * t * slope {
                    next = Some(cand);
                    break;
                }
                t *= 0.5;
            }
            match next {
                Some(cand) => {
                    c = cand;
                    s = self.eval(c);
                }
                None => break,
            }
        }
        (s, c, iterations)
    }
}

/// Minimizes the link's calibration loss over `(beta0, beta1)`. With
/// `degenerate` set the slope is pinned at zero (intercept-only fit).
pub(crate) fn fit_core(calib: &CalibrationSet, link: Link, x: &[f64], degenerate: bool) -> GlmFit {
    let y = calib.responses();
    let n = y.len() as f64;
    let x_mean = if degenerate { 0.0 } else { mean(x) };
    let d = if degenerate { vec![0.0; x.len()] } else { x.iter().map(|v| v - x_mean).collect() };
    let problem = Problem { y, d, x_mean, loss: Loss::new(link) };

    let mut candidates: Vec<[f64; 2]> = Vec::new();
    if let Some(b0) = intercept_mle(y, link) {
        candidates.push(problem.to_centered(b0, 0.0));
    }
    if link == Link::Logit {
        candidates.push([0.0, 0.0]);
    }
    if !degenerate {
        candidates.push(problem.to_centered(0.0, 1.0));
    }
    if candidates.is_empty() {
        candidates.push([0.0, 0.0]);
    }
    let start = *candidates.iter().min_by(|a, b| problem.value(**a).total_cmp(&problem.value(**b))).unwrap();

    let (state, opt, iterations) = if link == Link::Identity && !degenerate {
        // closed-form least squares
        let sdd: f64 = problem.d.iter().map(|v| v * v).sum();
        let sdy: f64 = problem.d.iter().zip(y).map(|(a, b)| a * b).sum();
        let c = [mean(y), sdy / sdd];
        (problem.eval(c), c, 0)
    } else {
        problem.minimize(start)
    };
    let gmax = state.grad[0].abs().max(state.grad[1].abs());
    let converged = !state.capped && gmax / n <= REPORT_TOL;

    // the returned loss never exceeds the start candidates, whatever the optimizer did
    let mut best = (state.value, opt);
    for c in candidates {
        let v = problem.value(c);
        if v < best.0 {
            best = (v, c);
        }
    }
    let (loss, c) = best;
    GlmFit { beta0: c[0] - c[1] * x_mean, beta1: c[1], loss, converged, iterations }
}

/// Fits the lifted GLM `E[y] = phi^{-1}(beta0 + beta1 g(f_hat))` by
/// minimizing the negative log-likelihood (pure squared error for the
/// identity link).
///
/// Logit predictions are clipped to `[1e-12, 1 - 1e-12]` and the loss is
/// flattened once the linear predictor is 30 units past the correct side,
/// so separable data give a finite fit with `converged = false`.
pub fn fit_lifted_glm(calib: &CalibrationSet, link: Link) -> Result<GlmFit> {
    if calib.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: calib.len() });
    }
    let x = covariate(calib, link)?;
    let ss: f64 = {
        let m = mean(&x);
        x.iter().map(|v| (v - m) * (v - m)).sum()
    };
    if is_constant(&x, ss) {
        return Err(Error::DegenerateDesign("transformed predictions are constant".into()));
    }
    Ok(fit_core(calib, link, &x, false))
}
