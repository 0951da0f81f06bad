mod common;

use common::{ols_oracle, t_cdf_oracle};
use liftcal::lcd::{committee_predict, lcd, Link, NullKind};
use liftcal::stats::{normal_quantile, t_cdf, t_quantile};
use liftcal::{fit_lifted_linear, haar_dwt, haar_idwt, residuals, CalibrationSet};
use proptest::prelude::*;

fn calib_strategy(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4..max_n).prop_flat_map(|n| {
        (prop::collection::vec(-50.0..50.0f64, n), prop::collection::vec(-10.0..10.0f64, n), -3.0..3.0f64).prop_map(
            |(f, noise, slope)| {
                let y = f.iter().zip(&noise).map(|(fi, e)| slope * fi + e).collect();
                (y, f)
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fit_matches_normal_equations((y, f) in calib_strategy(60)) {
        let fit = fit_lifted_linear(&CalibrationSet::new(y.clone(), f.clone()).unwrap()).unwrap();
        let (b0, b1) = ols_oracle(&y, &f);
        prop_assert!((fit.beta1_hat - b1).abs() <= 1e-8 * (1.0 + b1.abs()));
        prop_assert!((fit.beta0_hat - b0).abs() <= 1e-8 * (1.0 + b0.abs()));
    }

    #[test]
    fn affine_equivariance((y, f) in calib_strategy(60), c in -5.0..5.0f64, d in -100.0..100.0f64) {
        prop_assume!(c.abs() > 0.1);
        let base = fit_lifted_linear(&CalibrationSet::new(y.clone(), f.clone()).unwrap()).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let moved = fit_lifted_linear(&CalibrationSet::new(y2, f).unwrap()).unwrap();
        let scale = 1.0 + base.beta1_hat.abs() * c.abs();
        prop_assert!((moved.beta1_hat - c * base.beta1_hat).abs() <= 1e-10 * scale);
        prop_assert!((moved.beta0_hat - (c * base.beta0_hat + d)).abs() <= 1e-9 * (1.0 + d.abs() + scale));
        prop_assert!((moved.r_star.powi(2) - base.r_star.powi(2)).abs() <= 1e-10);
    }

    #[test]
    fn residual_variance_identity((y, f) in calib_strategy(60)) {
        let calib = CalibrationSet::new(y, f).unwrap();
        let fit = fit_lifted_linear(&calib).unwrap();
        let r = residuals(&fit, &calib).unwrap();
        let n = calib.len() as f64;
        let direct = r.iter().map(|v| v * v).sum::<f64>() / (n - 2.0);
        let identity = fit.a_squared() * (1.0 - fit.r_star.powi(2)) * fit.s_y.powi(2);
        let s2 = fit.sigma_u_hat.powi(2);
        prop_assert!((s2 - direct).abs() <= 1e-10 * direct.max(1e-300));
        prop_assert!((s2 - identity).abs() <= 1e-9 * direct.max(1e-12));
    }

    #[test]
    fn identity_lcd_is_calibration_r2((y, f) in calib_strategy(60)) {
        let calib = CalibrationSet::new(y, f).unwrap();
        let fit = fit_lifted_linear(&calib).unwrap();
        let report = lcd(&calib, Link::Identity, NullKind::InterceptMle).unwrap();
        prop_assert!((report.lcd - fit.r2_calb()).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&report.lcd));
    }

    #[test]
    fn committee_is_convex(
        preds in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 8), 1..5),
        raw in prop::collection::vec(0.01..1.0f64, 5),
    ) {
        let w: Vec<f64> = raw[..preds.len()].to_vec();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let out = committee_predict(&preds, &w).unwrap();
        for (j, v) in out.iter().enumerate() {
            let lo = preds.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            let hi = preds.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
        }
    }

    #[test]
    fn haar_round_trip(k in 1u32..10, seed in any::<u64>()) {
        let n = 1usize << k;
        let x: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 37.0 - 13.0).collect();
        let w = haar_dwt(&x).unwrap();
        let e0: f64 = x.iter().map(|v| v * v).sum();
        let e1: f64 = w.coefficients.iter().map(|v| v * v).sum();
        prop_assert!((e0 - e1).abs() <= 1e-10 * e0.max(1.0));
        let back = haar_idwt(&w).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn t_quantile_inverts_cdf_on_grid() {
    for df in 1..=200u32 {
        for k in 1..=99 {
            let p = f64::from(k) / 100.0;
            let q = t_quantile(p, df).unwrap();
            assert!((t_cdf(q, df).unwrap() - p).abs() <= 1e-9, "p={p} df={df}");
        }
    }
}

#[test]
fn t_cdf_agrees_with_reference() {
    for df in [1u32, 2, 3, 5, 10, 30, 120] {
        for i in -40..=40 {
            let x = f64::from(i) * 0.25;
            assert!((t_cdf(x, df).unwrap() - t_cdf_oracle(x, df)).abs() <= 1e-10, "x={x} df={df}");
        }
    }
}

#[test]
fn t_quantile_symmetry() {
    for df in [1u32, 2, 4, 9, 50, 200] {
        for k in 1..50 {
            let p = f64::from(k) / 100.0;
            let a = t_quantile(p, df).unwrap();
            let b = t_quantile(1.0 - p, df).unwrap();
            assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0), "p={p} df={df}");
        }
    }
}

#[test]
fn t_approaches_normal() {
    for k in 1..=99 {
        let p = f64::from(k) / 100.0;
        let gap = (t_quantile(p, 10_000).unwrap() - normal_quantile(p).unwrap()).abs();
        assert!(gap <= 1e-3, "p={p} gap={gap}");
    }
}
