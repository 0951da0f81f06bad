use std::path::Path;

use liftcal::lcd::{exp_loss_lcd, lcd, mic, mic_probabilities, rank_models, Link, NullKind};
use liftcal::mcmc::{chain_diagnostics, predictive_interval_mcmc, sample_posterior, McmcConfig};
use liftcal::stats::{NoiseKind, Seed};
use liftcal::synth::{baseline_predict, gen_dataset, inject_outliers, split_indices, Baseline, SynthConfig};
use liftcal::{
    committee_predict, consistency_test, detect_outliers, empirical_coverage, fit_lifted_linear, lambda_max,
    mspe_bound_estimate, reliability_curve, select_lambda, CalibrationSet, Interval, LambdaCriterion, OutlierSolution,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::io::{fmt_float, write_csv, write_csv_to, Table};
use crate::report::{real, to_value, RunReport};
use crate::{
    BaselineArgs, CalibInput, CalibrateArgs, Command, CoverageArgs, FamilyArg, IntervalArgs, LcdArgs, LinkArg,
    McmcArgs, MicArgs, ModelArg, NullArg, OutlierArgs, SimulateAction, SimulateArgs, TestInput,
};

type Out = Result<String, CliError>;

/// Runs one subcommand and returns what goes to standard output.
pub fn run(command: Command) -> Out {
    match command {
        Command::Calibrate(a) => calibrate(a),
        Command::Interval(a) => interval(a),
        Command::Lcd(a) => lcd_cmd(a),
        Command::Rank(a) => rank(a),
        Command::Mic(a) => mic_cmd(a),
        Command::Outliers(a) => outliers(a),
        Command::McmcInterval(a) => mcmc_interval(a),
        Command::Simulate(a) => match a.action {
            Some(SimulateAction::PredictBaseline(b)) => predict_baseline(b),
            None => simulate(a),
        },
        Command::Coverage(a) => coverage(a),
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--alpha must be in (0, 1), got {alpha}")))
    }
}

fn load_calib(input: &CalibInput, report: &mut RunReport) -> Result<CalibrationSet, CliError> {
    let table = Table::read(&input.calib)?.filter_split(input.split.as_deref())?;
    report.input("calibration", &table);
    if let Some(s) = &input.split {
        report.param("split", s);
    }
    Ok(CalibrationSet::new(table.floats("y")?, table.floats("f_hat")?)?)
}

fn load_test(test: &TestInput, calib: &CalibInput, report: &mut RunReport) -> Result<Table, CliError> {
    let path = test.test.as_ref().unwrap_or(&calib.calib);
    let table = Table::read(path)?.filter_split(test.test_split.as_deref())?;
    report.input("test", &table);
    if let Some(s) = &test.test_split {
        report.param("test_split", s);
    }
    Ok(table)
}

fn finish(report: &RunReport, out: Option<&Path>) -> Out {
    let mut text = report.to_json()?;
    text.push('\n');
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn calibrate(a: CalibrateArgs) -> Out {
    check_alpha(a.alpha)?;
    let mut report = RunReport::new("calibrate");
    let calib = load_calib(&a.input, &mut report)?;
    report.param("alpha", a.alpha);
    report.param("seed", a.seed);
    let fit = fit_lifted_linear(&calib)?;
    let (se0, se1) = fit.std_errors();
    let mut results = json!({
        "fit": to_value(fit),
        "r_squared": fit.r_star * fit.r_star,
        "r2_calb": fit.r2_calb(),
        "std_errors": { "beta0": real(se0), "beta1": real(se1) },
    });
    if calib.len() >= 4 {
        let t = consistency_test(&fit, a.alpha, Seed(a.seed))?;
        results["consistency_test"] = json!({
            "statistic": real(t.statistic),
            "threshold": t.threshold,
            "threshold_se": t.threshold_se,
            "alpha": t.alpha,
            "reject": t.reject,
        });
    } else {
        results["consistency_test"] = Value::from("skipped: needs at least 4 calibration points");
    }
    report.results = results;
    finish(&report, a.out.as_deref())
}

fn band_rows(f0: &[f64], intervals: &[Interval], y: Option<&[f64]>) -> (Vec<String>, Vec<Vec<String>>) {
    let mut headers: Vec<String> = ["row", "f_hat", "center", "lower", "upper"].map(String::from).to_vec();
    if y.is_some() {
        headers.extend(["y".to_string(), "covered".to_string()]);
    }
    let rows = intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| {
            let mut row =
                vec![i.to_string(), fmt_float(f0[i]), fmt_float(iv.center), fmt_float(iv.lower), fmt_float(iv.upper)];
            if let Some(y) = y {
                row.push(fmt_float(y[i]));
                row.push(u8::from(iv.contains(y[i])).to_string());
            }
            row
        })
        .collect();
    (headers, rows)
}

fn test_columns(table: &Table) -> Result<(Vec<f64>, Option<Vec<f64>>), CliError> {
    let f0 = table.floats("f_hat")?;
    let y = if table.column_index("y").is_some() { Some(table.floats("y")?) } else { None };
    Ok((f0, y))
}

fn interval(a: IntervalArgs) -> Out {
    check_alpha(a.alpha)?;
    let mut report = RunReport::new("interval");
    let calib = load_calib(&a.input, &mut report)?;
    let test = load_test(&a.test, &a.input, &mut report)?;
    report.param("alpha", a.alpha);
    let fit = fit_lifted_linear(&calib)?;
    let (f0, y) = test_columns(&test)?;
    let intervals = liftcal::prediction_intervals(&fit, &f0, a.alpha)?;
    let mspe: Vec<f64> = f0.iter().map(|&f| mspe_bound_estimate(&fit, f)).collect::<Result<_, _>>()?;
    let mut results = json!({
        "n_test": f0.len(),
        "intervals": to_value(&intervals),
        "mspe_bound": mspe,
    });
    if let Some(y) = &y {
        results["coverage"] = Value::from(empirical_coverage(&intervals, y)?);
    }
    report.results = results;
    if let Some(path) = &a.out {
        let (h, rows) = band_rows(&f0, &intervals, y.as_deref());
        write_csv(path, &h, &rows)?;
    }
    finish(&report, None)
}

fn link_and_null(link: LinkArg, null: Option<NullArg>) -> (Link, NullKind) {
    let link = match link {
        LinkArg::Identity => Link::Identity,
        LinkArg::Logit => Link::Logit,
        LinkArg::Log => Link::Log,
    };
    let null = match null {
        Some(NullArg::Uniform) => NullKind::UniformBinary,
        Some(NullArg::Intercept) => NullKind::InterceptMle,
        None => NullKind::default_for(link),
    };
    (link, null)
}

fn lcd_cmd(a: LcdArgs) -> Out {
    let mut report = RunReport::new("lcd");
    let calib = load_calib(&a.input, &mut report)?;
    let (link, null) = link_and_null(a.link, a.null);
    report.param("link", link.to_string());
    report.param("null", null);
    let r = lcd(&calib, link, null)?;
    let mut results = to_value(&r);
    if link == Link::Logit {
        results["exp_loss_lcd"] = Value::from(exp_loss_lcd(&r));
    }
    report.results = results;
    finish(&report, a.out.as_deref())
}

fn rank(a: LcdArgs) -> Out {
    let mut report = RunReport::new("rank");
    let table = Table::read(&a.input.calib)?.filter_split(a.input.split.as_deref())?;
    report.input("calibration", &table);
    if let Some(s) = &a.input.split {
        report.param("split", s);
    }
    let (link, null) = link_and_null(a.link, a.null);
    report.param("link", link.to_string());
    report.param("null", null);
    let y = table.floats("y")?;
    let mut models = Vec::new();
    for h in &table.headers {
        if let Some(label) = h.strip_prefix("f_hat:") {
            models.push((label.to_string(), table.floats(h)?));
        }
    }
    if models.is_empty() {
        return Err(CliError::Input(format!("{}: no 'f_hat:<label>' columns to rank", table.name)));
    }
    let ranked = rank_models(&y, &models, link, null)?;
    let order: Vec<&str> = ranked.iter().map(|m| m.model_id.as_str()).collect();
    let lcds: Vec<Value> = ranked.iter().map(|m| m.report.as_ref().map_or(Value::Null, |r| real(r.lcd))).collect();
    report.results = json!({ "order": order, "lcd": lcds, "models": to_value(&ranked) });
    finish(&report, a.out.as_deref())
}

fn mic_cmd(a: MicArgs) -> Out {
    let mut report = RunReport::new("mic");
    let table = Table::read(&a.scores)?;
    report.input("scores", &table);
    let ids = table
        .column_index("model_id")
        .ok_or_else(|| CliError::Input(format!("{}: missing column 'model_id'", table.name)))?;
    let (loss, complexity) = (table.floats("loss")?, table.floats("complexity")?);
    let scores = table
        .rows
        .iter()
        .zip(loss.iter().zip(&complexity))
        .map(|(row, (&l, &c))| mic(row[ids].clone(), l, c))
        .collect::<Result<Vec<_>, _>>()?;
    let weights = mic_probabilities(&scores)?;
    let mut results = json!({
        "scores": to_value(&scores),
        "probabilities": weights,
    });
    if let Some(path) = &a.predictions {
        let preds = Table::read(path)?;
        report.input("predictions", &preds);
        let columns =
            scores.iter().map(|s| preds.floats(&format!("f_hat:{}", s.model_id))).collect::<Result<Vec<_>, _>>()?;
        let committee = committee_predict(&columns, &weights)?;
        if let Some(out) = &a.out {
            let rows: Vec<Vec<String>> =
                committee.iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt_float(*v)]).collect();
            write_csv(out, &["row".to_string(), "f_hat".to_string()], &rows)?;
        }
        results["committee"] = to_value(&committee);
    } else if a.out.is_some() {
        return Err(CliError::Input("--out needs --predictions to form a committee".into()));
    }
    report.results = results;
    finish(&report, None)
}

fn outlier_results(sol: &OutlierSolution) -> Value {
    json!({
        "beta0": sol.beta0,
        "beta1": sol.beta1,
        "lambda": sol.lambda,
        "iterations": sol.iterations,
        "objective": sol.objective,
        "outlier_indices": sol.outlier_indices,
        "n_outliers": sol.outlier_indices.len(),
    })
}

fn outliers(a: OutlierArgs) -> Out {
    let mut report = RunReport::new("outliers");
    let calib = load_calib(&a.input, &mut report)?;
    let fit = fit_lifted_linear(&calib)?;
    let lmax = lambda_max(&calib, &fit)?;
    let sol = match a.lambda {
        Some(l) => {
            report.param("lambda", l);
            detect_outliers(&calib, l)?
        }
        None => {
            report.param("grid", a.grid);
            report.param("criterion", LambdaCriterion::default());
            select_lambda(&calib, a.grid, LambdaCriterion::default())?.1
        }
    };
    let mut results = outlier_results(&sol);
    results["lambda_max"] = Value::from(lmax);
    report.results = results;
    if let Some(path) = &a.out {
        let headers = ["row", "y", "f_hat", "gamma", "outlier"].map(String::from).to_vec();
        let rows: Vec<Vec<String>> = (0..calib.len())
            .map(|i| {
                vec![
                    i.to_string(),
                    fmt_float(calib.responses()[i]),
                    fmt_float(calib.predictions()[i]),
                    fmt_float(sol.gamma[i]),
                    u8::from(sol.gamma[i] != 0.0).to_string(),
                ]
            })
            .collect();
        write_csv(path, &headers, &rows)?;
    }
    finish(&report, None)
}

fn mcmc_interval(a: McmcArgs) -> Out {
    check_alpha(a.alpha)?;
    let mut report = RunReport::new("mcmc-interval");
    let calib = load_calib(&a.input, &mut report)?;
    let test = load_test(&a.test, &a.input, &mut report)?;
    let family = match a.family {
        FamilyArg::Gaussian => NoiseKind::Gaussian,
        FamilyArg::Gumbel => NoiseKind::Gumbel,
    };
    report.param("alpha", a.alpha);
    report.param("family", family);
    report.param("samples", a.samples);
    report.param("burn_in", a.burn_in);
    report.param("chains", a.chains);
    report.param("seed", a.seed);
    let config = McmcConfig {
        m_samples: a.samples,
        burn_in: a.burn_in,
        seed: Seed(a.seed),
        n_chains: a.chains,
        ..McmcConfig::default()
    };
    let chain = sample_posterior(&calib, family, &config)?;
    let diag = chain_diagnostics(&chain)?;
    let (f0, y) = test_columns(&test)?;
    // one noise stream per test point keeps rows independent of each other
    let intervals: Vec<Interval> = f0
        .iter()
        .enumerate()
        .map(|(i, &f)| predictive_interval_mcmc(&chain, f, a.alpha, Seed(a.seed).child(i as u64)))
        .collect::<Result<_, _>>()?;
    let mut results = json!({
        "n_test": f0.len(),
        "intervals": to_value(&intervals),
        "diagnostics": to_value(diag),
        "posterior_means": chain.means(),
    });
    if let Some(y) = &y {
        results["coverage"] = Value::from(empirical_coverage(&intervals, y)?);
    }
    report.results = results;
    if let Some(path) = &a.out {
        let (h, rows) = band_rows(&f0, &intervals, y.as_deref());
        write_csv(path, &h, &rows)?;
    }
    finish(&report, None)
}

fn emit_csv(headers: &[String], rows: &[Vec<String>], out: Option<&Path>, report: &RunReport) -> Out {
    match out {
        Some(path) => {
            write_csv(path, headers, rows)?;
            finish(report, None)
        }
        None => {
            let mut buf = Vec::new();
            write_csv_to(&mut buf, headers, rows)?;
            String::from_utf8(buf).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

fn simulate(a: SimulateArgs) -> Out {
    let mut report = RunReport::new("simulate");
    report.param("n", a.n);
    report.param("seed", a.seed);
    report.param("sigma_eps", a.sigma_eps);
    report.param("outliers", a.outliers);
    let config = SynthConfig { n: a.n, sigma_eps: a.sigma_eps, seed: Seed(a.seed), ..SynthConfig::default() };
    let ds = gen_dataset(&config)?;
    let mut responses = ds.responses.clone();
    let mut flagged = vec![false; ds.len()];
    if a.outliers > 0 {
        let n = responses.len() as f64;
        let mean = responses.iter().sum::<f64>() / n;
        let sd = (responses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let (y, idx) = inject_outliers(&responses, mean, sd, a.outliers, Seed(a.seed))?;
        responses = y;
        for i in idx {
            flagged[i] = true;
        }
    }
    let mut headers: Vec<String> = (1..=10).map(|j| format!("x{j}")).collect();
    headers.extend(["y".to_string(), "truth".to_string()]);
    if a.outliers > 0 {
        headers.push("outlier".to_string());
    }
    let rows: Vec<Vec<String>> = (0..ds.len())
        .map(|i| {
            let mut row: Vec<String> = ds.predictors[i].iter().map(|v| fmt_float(*v)).collect();
            row.push(fmt_float(responses[i]));
            row.push(fmt_float(ds.truth[i]));
            if a.outliers > 0 {
                row.push(u8::from(flagged[i]).to_string());
            }
            row
        })
        .collect();
    report.results = json!({ "rows": ds.len(), "columns": headers });
    emit_csv(&headers, &rows, a.out.as_deref(), &report)
}

fn predict_baseline(a: BaselineArgs) -> Out {
    let mut report = RunReport::new("simulate predict-baseline");
    let table = Table::read(&a.data)?;
    report.input("data", &table);
    for taken in ["f_hat", "split"] {
        if table.column_index(taken).is_some() {
            return Err(CliError::Input(format!("{}: already has a '{taken}' column", table.name)));
        }
    }
    let kind = match a.model {
        ModelArg::Mean => Baseline::Mean,
        ModelArg::Ols => Baseline::LinearOls,
        ModelArg::Knn if a.k == 0 => return Err(CliError::Input("--k must be at least 1".into())),
        ModelArg::Knn => Baseline::Knn(a.k),
    };
    report.param("model", format!("{kind:?}"));
    report.param("seed", a.seed);
    let mut inputs: Vec<&String> = table.headers.iter().filter(|h| is_input_column(h)).collect();
    inputs.sort_by_key(|h| h[1..].parse::<usize>().unwrap_or(usize::MAX));
    if inputs.is_empty() {
        return Err(CliError::Input(format!("{}: no x<j> input columns", table.name)));
    }
    let columns = inputs.iter().map(|h| table.floats(h)).collect::<Result<Vec<_>, _>>()?;
    let n = table.rows.len();
    let x: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let y = table.floats("y")?;
    let (train, cal, _) = split_indices(n, Seed(a.seed));
    if train.is_empty() {
        return Err(CliError::Input(format!("{}: too few rows to split", table.name)));
    }
    let train_x: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
    let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let pred = baseline_predict(kind, &train_x, &train_y, &x)?;
    let mut split = vec!["test"; n];
    for &i in &train {
        split[i] = "train";
    }
    for &i in &cal {
        split[i] = "calib";
    }
    let mut headers = table.headers.clone();
    headers.extend(["split".to_string(), "f_hat".to_string()]);
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.push(split[i].to_string());
            row.push(fmt_float(pred.predictions[i]));
            row
        })
        .collect();
    report.results = json!({
        "rows": n,
        "train": train.len(),
        "calib": cal.len(),
        "test": n - train.len() - cal.len(),
        "ridge_fallback": pred.ridge_fallback,
    });
    emit_csv(&headers, &rows, a.out.as_deref(), &report)
}

fn is_input_column(h: &str) -> bool {
    h.len() > 1 && h.starts_with('x') && h[1..].bytes().all(|b| b.is_ascii_digit())
}

fn coverage(a: CoverageArgs) -> Out {
    let mut report = RunReport::new("coverage");
    let calib = load_calib(&a.input, &mut report)?;
    let test = load_test(&a.test, &a.input, &mut report)?;
    report.param("levels", &a.levels);
    let fit = fit_lifted_linear(&calib)?;
    let test = CalibrationSet::new(test.floats("y")?, test.floats("f_hat")?)?;
    let curve = reliability_curve(&fit, &test, &a.levels)?;
    report.results = json!({
        "levels": curve.levels,
        "empirical": curve.empirical,
        "max_deviation": curve.max_deviation(),
        "n_test": test.len(),
    });
    if let Some(path) = &a.out {
        let rows: Vec<Vec<String>> =
            curve.levels.iter().zip(&curve.empirical).map(|(l, e)| vec![fmt_float(*l), fmt_float(*e)]).collect();
        write_csv(path, &["nominal".to_string(), "empirical".to_string()], &rows)?;
    }
    finish(&report, None)
}
