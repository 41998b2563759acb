//! Acceptance suite. Prints one PASS/FAIL line per check and exits non-zero
//! if any check fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use chrono::{Duration, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use structcast::backtest::{
    dm_test, export_backtest, nrmse_per_hour, rmse_per_hour, rolling_backtest, ErrorPanel, Loss,
};
use structcast::data::config::default_lambdas;
use structcast::data::time::cutoff;
use structcast::data::{
    generate_scenario, load_state, Dataset, EngineConfig, Quantity, RegimeShift, ScenarioSpec, WeatherAttribute,
};
use structcast::features::{apply_power_curve, log_profile_transform, PowerCurveTable};
use structcast::models::{read_bundles_csv, replay_forecast_day, run_forecast_day, ForecastBundle, ModelState, Node};
use structcast::solvers::{
    combination_objective, fit_combination, fit_lasso, fit_weighted_isotonic, ConstraintMode, LassoFit,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

// ---------------------------------------------------------------- solvers

fn standardized(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut x = DMatrix::from_fn(rows, cols, |_, _| gauss(rng));
    for mut col in x.column_iter_mut() {
        let mean = col.sum() / rows as f64;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / (rows as f64 - 1.0)).sqrt();
        col /= sd;
    }
    x
}

/// Largest violation of the subgradient conditions of
/// `(1/M)‖Xβ + b − y‖² + λ‖β‖₁`.
fn kkt_violation(x: &DMatrix<f64>, y: &[f64], fit: &LassoFit) -> f64 {
    let m = x.nrows() as f64;
    let beta = DVector::from_column_slice(&fit.coefficients);
    let resid = x * &beta + DVector::from_element(x.nrows(), fit.intercept) - DVector::from_column_slice(y);
    let grad = x.tr_mul(&resid) * (2.0 / m);
    let intercept_grad = (2.0 / m) * resid.sum();
    grad.iter()
        .zip(&fit.coefficients)
        .map(|(&g, &b)| {
            if b == 0.0 {
                (g.abs() - fit.penalty).max(0.0)
            } else {
                (g + fit.penalty * b.signum()).abs()
            }
        })
        .fold(intercept_grad.abs(), f64::max)
}

fn lasso_kkt() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let lambdas = default_lambdas();
    let (mut worst, mut converged) = (0.0f64, 0);
    for _ in 0..500 {
        let rows = rng.gen_range(10..=200);
        let cols = rng.gen_range(2..=50);
        let x = standardized(&mut rng, rows, cols);
        let beta: Vec<f64> = (0..cols)
            .map(|_| if rng.gen_bool(0.3) { rng.gen_range(-2.0..2.0) } else { 0.0 })
            .collect();
        let y: Vec<f64> = (0..rows)
            .map(|i| 3.0 + (0..cols).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + 0.5 * gauss(&mut rng))
            .collect();
        let lambda = lambdas[rng.gen_range(0..lambdas.len())];
        let fit = fit_lasso(&x, &y, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER).expect("valid problem");
        if fit.converged {
            converged += 1;
            worst = worst.max(kkt_violation(&x, &y, &fit));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 30.0 && converged > 0,
        format!("{converged}/500 converged, max KKT violation {worst:.2e} (≤ 1e-6), {secs:.1} s (< 30 s)"),
    )
}

/// Best non-decreasing step fit by enumerating contiguous partitions.
fn partition_oracle(y: &[f64], w: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0..(1u32 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let (mut start, mut prev, mut feasible) = (0, f64::NEG_INFINITY, true);
        for end in 1..=n {
            if end == n || mask & (1 << (end - 1)) != 0 {
                let ws: f64 = w[start..end].iter().sum();
                let m = (start..end).map(|i| w[i] * y[i]).sum::<f64>() / ws;
                if m < prev {
                    feasible = false;
                    break;
                }
                prev = m;
                fitted.extend(std::iter::repeat(m).take(end - start));
                start = end;
            }
        }
        if feasible {
            let obj: f64 = (0..n).map(|i| w[i] * (fitted[i] - y[i]).powi(2)).sum();
            if obj < best.0 {
                best = (obj, fitted);
            }
        }
    }
    best.1
}

fn isotonic_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 1000.0).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..150.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
        let curve = fit_weighted_isotonic(&x, &y, &w).expect("valid instance");
        let oracle = partition_oracle(&y, &w);
        for (xi, o) in x.iter().zip(&oracle) {
            worst = worst.max((curve.eval(*xi) - o).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && secs < 10.0,
        format!("1000 instances, max deviation {worst:.2e} (≤ 1e-8), {secs:.2} s (< 10 s)"),
    )
}

/// Minimum of the intercept-profiled residual sum of squares over the
/// simplex grid with step 0.01.
fn simplex_grid_minimum(p: &DMatrix<f64>, y: &[f64]) -> f64 {
    let (m, n) = p.shape();
    assert_eq!(n, 5);
    let y_mean = y.iter().sum::<f64>() / m as f64;
    let mut pc = p.clone();
    for mut col in pc.column_iter_mut() {
        let mean = col.sum() / m as f64;
        col.add_scalar_mut(-mean);
    }
    let yc = DVector::from_iterator(m, y.iter().map(|v| v - y_mean));
    let q = pc.tr_mul(&pc);
    let c = pc.tr_mul(&yc);
    let base = yc.norm_squared();
    let steps = 100i32;
    let mut best = f64::INFINITY;
    let mut w = [0.0f64; 5];
    for a in 0..=steps {
        w[0] = a as f64 / steps as f64;
        for b in 0..=steps - a {
            w[1] = b as f64 / steps as f64;
            for cc in 0..=steps - a - b {
                w[2] = cc as f64 / steps as f64;
                for d in 0..=steps - a - b - cc {
                    w[3] = d as f64 / steps as f64;
                    w[4] = (steps - a - b - cc - d) as f64 / steps as f64;
                    let mut v = base;
                    for i in 0..5 {
                        let mut qi = 0.0;
                        for j in 0..5 {
                            qi += q[(i, j)] * w[j];
                        }
                        v += w[i] * (qi - 2.0 * c[i]);
                    }
                    best = best.min(v);
                }
            }
        }
    }
    best
}

fn simplex_optimality() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut worst_gap, mut worst_simplex) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..200 {
        let truth: Vec<f64> = (0..100).map(|_| 50.0 + 20.0 * gauss(&mut rng)).collect();
        let bias: Vec<f64> = (0..5).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let noise: Vec<f64> = (0..5).map(|_| rng.gen_range(1.0..15.0)).collect();
        let p = DMatrix::from_fn(100, 5, |i, j| truth[i] + bias[j] + noise[j] * gauss(&mut rng));
        let fit = fit_combination(&p, &truth, ConstraintMode::SimplexFixedSum).expect("well-posed");
        let fitted = combination_objective(&p, &truth, &fit);
        worst_gap = worst_gap.max(fitted - simplex_grid_minimum(&p, &truth));
        let sum: f64 = fit.weights.iter().sum();
        let neg = fit.weights.iter().fold(0.0f64, |m, w| m.max(-w));
        worst_simplex = worst_simplex.max((sum - 1.0).abs()).max(neg);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst_gap <= 1e-6 && worst_simplex <= 1e-9,
        format!(
            "200 problems, max (fitted − grid) objective {worst_gap:.3e} (≤ 1e-6), max simplex violation {worst_simplex:.1e} (≤ 1e-9), {secs:.1} s"
        ),
    )
}

// ---------------------------------------------------------------- features

fn wind_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v10: f64 = rng.gen_range(0.0..30.0);
        let z0: f64 = rng.gen_range(0.0002..1.0);
        let h: f64 = rng.gen_range(20.0..200.0);
        let direct = v10 * (h / z0).ln() / (10.0 / z0).ln();
        worst = worst.max((log_profile_transform(v10, z0, h).unwrap() - direct).abs());
    }
    let table = PowerCurveTable::new("fixture", vec![(3.0, 0.0), (5.0, 0.25), (7.0, 0.75), (9.0, 1.0), (25.0, 1.0), (25.5, 0.0)]).unwrap();
    // (speed, hand-computed factor): table points, midpoints, interior points, outside
    let expected = [
        (3.0, 0.0),
        (5.0, 0.25),
        (7.0, 0.75),
        (9.0, 1.0),
        (25.0, 1.0),
        (25.5, 0.0),
        (25.25, 0.5),
        (4.0, 0.125),
        (6.0, 0.5),
        (8.0, 0.875),
        (5.5, 0.375),
        (17.0, 1.0),
        (2.0, 0.0),
        (26.0, 0.0),
    ];
    let mismatches: Vec<String> = expected
        .iter()
        .filter_map(|&(v, f)| {
            let got = apply_power_curve(v, &table).unwrap();
            (got != f).then(|| format!("v={v}: {got} ≠ {f}"))
        })
        .collect();
    outcome(
        worst <= 1e-12 && mismatches.is_empty(),
        format!(
            "100 triples, max |Δ| {worst:.1e} (≤ 1e-12); {} power-curve points exact{}",
            expected.len() - mismatches.len(),
            if mismatches.is_empty() { String::new() } else { format!(", mismatches: {}", mismatches.join("; ")) }
        ),
    )
}

// ---------------------------------------------------------------- metrics

fn panel_from(actuals: &[Vec<f64>], forecasts: &[Vec<f64>], c: f64) -> ErrorPanel {
    let mut p = ErrorPanel::new(actuals[0].len());
    let d0 = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
    for (k, (a, f)) in actuals.iter().zip(forecasts).enumerate() {
        let f = BTreeMap::from([("m".to_string(), f.iter().map(|v| v * c).collect())]);
        p.push_day(d0 + Duration::days(k as i64), a.iter().map(|v| v * c).collect(), &f).unwrap();
    }
    p
}

fn metrics() -> Outcome {
    // actuals (10, 20, 40), forecasts (13, 16, 41): errors (3, −4, 1)
    let fixture = panel_from(&[vec![10.0], vec![20.0], vec![40.0]], &[vec![13.0], vec![16.0], vec![41.0]], 1.0);
    let rmse = rmse_per_hour(&fixture, "m").unwrap()[0].unwrap();
    let nrmse = nrmse_per_hour(&fixture, "m").unwrap()[0].unwrap();
    // RMSE² = 26/3; sample variance of actuals = 700/3
    let hand_rmse = (26.0f64 / 3.0).sqrt();
    let hand_nrmse = (26.0f64 / 700.0).sqrt();
    let fixture_err = (rmse - hand_rmse).abs().max((nrmse - hand_nrmse).abs());

    // errors (−1, 0, 2) on actuals (0, 3, 3)
    let second = panel_from(&[vec![0.0], vec![3.0], vec![3.0]], &[vec![-1.0], vec![3.0], vec![5.0]], 1.0);
    let r2 = rmse_per_hour(&second, "m").unwrap()[0].unwrap();
    let n2 = nrmse_per_hour(&second, "m").unwrap()[0].unwrap();
    let second_err = (r2 - (5.0f64 / 3.0).sqrt()).abs().max((n2 - (5.0f64 / 3.0).sqrt() / 3f64.sqrt()).abs());

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let actuals: Vec<Vec<f64>> = (0..40).map(|_| (0..72).map(|_| 80.0 + 40.0 * gauss(&mut rng)).collect()).collect();
    let forecasts: Vec<Vec<f64>> = actuals
        .iter()
        .map(|a| a.iter().map(|v| v + 10.0 * gauss(&mut rng)).collect())
        .collect();
    let base = nrmse_per_hour(&panel_from(&actuals, &forecasts, 1.0), "m").unwrap();
    let mut worst_scale = 0.0f64;
    for c in [0.1, 10.0] {
        let scaled = nrmse_per_hour(&panel_from(&actuals, &forecasts, c), "m").unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            worst_scale = worst_scale.max((a.unwrap() - b.unwrap()).abs());
        }
    }
    let worst_fixture = fixture_err.max(second_err);
    outcome(
        worst_fixture <= 1e-12 && worst_scale <= 1e-10,
        format!("fixtures max |Δ| {worst_fixture:.1e} (≤ 1e-12), scale invariance max |Δ| {worst_scale:.1e} (≤ 1e-10)"),
    )
}

fn dm_calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut inside, mut antisymmetric) = (0, true);
    for _ in 0..200 {
        let a: Vec<f64> = (0..200).map(|_| gauss(&mut rng)).collect();
        let b: Vec<f64> = (0..200).map(|_| gauss(&mut rng)).collect();
        let ab = dm_test(&a, &b, Loss::Squared, 0).unwrap();
        let ba = dm_test(&b, &a, Loss::Squared, 0).unwrap();
        antisymmetric &= ab.statistic == -ba.statistic;
        if ab.statistic.abs() < 1.96 {
            inside += 1;
        }
    }
    let share = inside as f64 / 200.0;
    outcome(
        (0.92..=0.98).contains(&share) && antisymmetric,
        format!(
            "|statistic| < 1.96 in {inside}/200 = {:.1}% (92–98%), antisymmetry {}",
            100.0 * share,
            if antisymmetric { "exact" } else { "BROKEN" }
        ),
    )
}

// ---------------------------------------------------------------- end to end

const SHIFT_DAY: usize = 300;

/// 400 days whose price level oscillates with a 30-day period before day
/// 300 and is constant afterwards.
fn regime_scenario() -> ScenarioSpec {
    let mut regimes: Vec<RegimeShift> = (0..SHIFT_DAY)
        .map(|day| {
            let phase = 2.0 * PI * (day as f64 - SHIFT_DAY as f64) / 30.0 + 1.5 * PI;
            RegimeShift {
                day,
                scale: 1.0 + 0.25 * phase.sin(),
            }
        })
        .collect();
    regimes.push(RegimeShift {
        day: SHIFT_DAY,
        scale: 1.0,
    });
    ScenarioSpec {
        seed: 7,
        start_date: NaiveDate::from_ymd_opt(2022, 3, 15).unwrap(),
        n_days: 400,
        regimes,
        ..ScenarioSpec::default()
    }
}

fn mean_structured_weight(bundles: &[ForecastBundle], from: NaiveDate, to: NaiveDate, member: &str) -> f64 {
    let w: Vec<f64> = bundles
        .iter()
        .filter(|b| b.issue_date >= from && b.issue_date <= to)
        .flat_map(|b| b.weights.iter())
        .filter(|w| w.node == Node::Structured && w.member == member)
        .map(|w| w.weight)
        .collect();
    if w.is_empty() {
        f64::NAN
    } else {
        w.iter().sum::<f64>() / w.len() as f64
    }
}

fn end_to_end() -> (Outcome, Outcome) {
    let spec = regime_scenario();
    let (data, _) = generate_scenario(&spec).expect("scenario");
    let config = EngineConfig::default();
    let start = spec.start_date + Duration::days(200);
    let end = spec.start_date + Duration::days(399);
    let t = Instant::now();
    let run = rolling_backtest(&data, start, end, &config).expect("backtest runs");
    let secs = t.elapsed().as_secs_f64();
    let scored_failures = run.failures.iter().filter(|f| f.scored).count();

    let direct = nrmse_per_hour(&run.panel, "direct").unwrap();
    let structured = nrmse_per_hour(&run.panel, "structured").unwrap();
    let combined = nrmse_per_hour(&run.panel, "combined").unwrap();
    let v = |x: &Option<f64>| x.unwrap_or(f64::NAN);
    let daytime_ok = (12..=18).all(|h| v(&structured[h - 1]) < v(&direct[h - 1]));
    let combined_ok = (1..=24).all(|h| v(&combined[h - 1]) <= v(&direct[h - 1]) + 0.02);
    let worst_margin = (1..=24)
        .map(|h| v(&combined[h - 1]) - v(&direct[h - 1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let daytime: Vec<String> = (12..=18)
        .map(|h| format!("{h}:{:.3}/{:.3}", v(&structured[h - 1]), v(&direct[h - 1])))
        .collect();
    let structural = outcome(
        daytime_ok && combined_ok && secs < 600.0 && run.panel.len() >= 2,
        format!(
            "{} scored days ({scored_failures} excluded); NRMSE structured/direct at h {}; max combined − direct over day 1 {worst_margin:+.3} (≤ +0.02); {secs:.0} s (< 600 s)",
            run.panel.len(),
            daytime.join(" ")
        ),
    );

    let shift = spec.start_date + Duration::days(SHIFT_DAY as i64);
    let (early_from, early_to) = (shift + Duration::days(1), shift + Duration::days(14));
    let (late_from, late_to) = (early_from + Duration::days(60), early_to + Duration::days(60));
    let e1 = mean_structured_weight(&run.bundles, early_from, early_to, "window_1w");
    let e8 = mean_structured_weight(&run.bundles, early_from, early_to, "window_8w");
    let l1 = mean_structured_weight(&run.bundles, late_from, late_to, "window_1w");
    let l8 = mean_structured_weight(&run.bundles, late_from, late_to, "window_8w");
    let adaptive = outcome(
        e1 > e8 && l8 > l1,
        format!(
            "mean weights 1-week/8-week: {early_from}..{early_to} {e1:.3}/{e8:.3} (need 1w > 8w), {late_from}..{late_to} {l1:.3}/{l8:.3} (need 8w > 1w)"
        ),
    );
    (structural, adaptive)
}

// ---------------------------------------------------------------- leakage and replay

fn small_setup() -> (Dataset, EngineConfig, NaiveDate) {
    let spec = ScenarioSpec {
        seed: 23,
        n_days: 70,
        ..ScenarioSpec::default()
    };
    let (data, _) = generate_scenario(&spec).unwrap();
    let config = EngineConfig {
        lear_window: 30,
        ensemble_window: 10,
        warmup_days: 25,
        ..EngineConfig::default()
    };
    (data, config, spec.start_date)
}

fn bundle_bits(b: &ForecastBundle) -> String {
    serde_json::to_string(b).expect("bundle serializes")
}

fn no_leakage() -> Outcome {
    let (data, config, start) = small_setup();
    let day = start + Duration::days(52);
    let mut state = ModelState::new(config.horizon_hours);
    let mut d = start + Duration::days(20);
    while d < day {
        let _ = run_forecast_day(&mut state, &data, d, &config);
        d += Duration::days(1);
    }
    let base = match run_forecast_day(&mut state.clone(), &data, day, &config) {
        Ok(b) => bundle_bits(&b),
        Err(e) => return outcome(false, format!("reference day failed: {e}")),
    };

    let c = cutoff(day);
    let first = data.market.index_of(c).expect("cutoff inside the panel");
    let later_runs: Vec<_> = data.weather.issue_times().filter(|&t| t >= c).collect();
    let (n_loc, max_lead) = (data.weather.locations().len(), data.weather.max_lead());
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut identical = 0;
    let mut cells = 0;
    for trial in 0..20 {
        let mut perturbed = data.clone();
        for q in Quantity::ALL {
            let col = perturbed.market.column_mut(q);
            // the first hour at the cutoff is always hit
            col[first] += 1000.0;
            for _ in 0..60 {
                let i = rng.gen_range(first..col.len());
                col[i] = if trial % 5 == 0 { f64::NAN } else { col[i] * rng.gen_range(-3.0..3.0) + rng.gen_range(-500.0..500.0) };
                cells += 1;
            }
        }
        for _ in 0..200 {
            let issue = later_runs[rng.gen_range(0..later_runs.len())];
            let lead = rng.gen_range(1..=max_lead);
            let loc = rng.gen_range(0..n_loc);
            let attr = WeatherAttribute::ALL[rng.gen_range(0..WeatherAttribute::ALL.len())];
            let value = match attr {
                WeatherAttribute::CloudCover => rng.gen_range(0.0..1.0),
                WeatherAttribute::Irradiation => rng.gen_range(0.0..1000.0),
                WeatherAttribute::WindSpeed10m => rng.gen_range(0.0..40.0),
                WeatherAttribute::Temperature => rng.gen_range(-30.0..40.0),
            };
            perturbed.weather.set(issue, lead, loc, attr, value).expect("cell exists");
            cells += 1;
        }
        let mut s = state.clone();
        if let Ok(b) = run_forecast_day(&mut s, &perturbed, day, &config) {
            if bundle_bits(&b) == base {
                identical += 1;
            }
        }
    }
    outcome(
        identical == 20,
        format!("{identical}/20 trials bit-identical after perturbing {cells} cells at or after the {c} cutoff"),
    )
}

fn determinism_and_replay() -> Outcome {
    let (data, config, start) = small_setup();
    let (from, to) = (start + Duration::days(48), start + Duration::days(55));
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut runs = Vec::new();
    for dir in &dirs {
        let run = rolling_backtest(&data, from, to, &config).expect("backtest");
        export_backtest(&run, dir.path(), Loss::Squared).expect("export");
        runs.push(run);
    }
    let mut differing = Vec::new();
    let mut files = 0;
    for entry in std::fs::read_dir(dirs[0].path()).unwrap() {
        let name = entry.unwrap().file_name();
        files += 1;
        let a = std::fs::read(dirs[0].path().join(&name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&name)).ok();
        if b.as_deref() != Some(&a[..]) {
            differing.push(name.to_string_lossy().into_owned());
        }
    }

    // replay the last archived day from the persisted state
    let run = &runs[0];
    let last = run.bundles.last().expect("scored bundles");
    let loaded = load_state(dirs[0].path().join("state.json")).expect("state loads");
    let replay = replay_forecast_day(&loaded, &data, last.issue_date, &config).expect("replay");
    let replay_ok = bundle_bits(&replay) == bundle_bits(last);
    let archived = read_bundles_csv(dirs[0].path().join("bundles.csv")).expect("archive reads");
    let csv_ok = archived.last().is_some_and(|(d, rows)| *d == last.issue_date && *rows == replay.rows);

    // step every archived day again from a state saved and reloaded the day before
    let mut state = ModelState::new(config.horizon_hours);
    let mut d = from - Duration::days(config.warmup_days as i64);
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("state.json");
    let mut stepped = 0;
    let mut step_ok = true;
    while d <= to {
        structcast::data::save_state(&state, &path).unwrap();
        state = load_state(&path).unwrap();
        if let Ok(b) = run_forecast_day(&mut state, &data, d, &config) {
            if let Some(a) = run.bundles.iter().find(|a| a.issue_date == d) {
                step_ok &= bundle_bits(a) == bundle_bits(&b);
                stepped += 1;
            }
        }
        d += Duration::days(1);
    }
    outcome(
        differing.is_empty() && replay_ok && csv_ok && step_ok && stepped == run.bundles.len(),
        format!(
            "{files} output files byte-identical across runs{}; replay of {} {}; {stepped}/{} archived days reproduced through save/load",
            if differing.is_empty() { String::new() } else { format!(" EXCEPT {}", differing.join(", ")) },
            last.issue_date,
            if replay_ok && csv_ok { "bit-exact" } else { "DIFFERS" },
            run.bundles.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("lasso_kkt", lasso_kkt()),
        ("isotonic_oracle", isotonic_oracle()),
        ("simplex_optimality", simplex_optimality()),
        ("wind_chain", wind_chain()),
        ("metrics", metrics()),
        ("dm_calibration", dm_calibration()),
    ];
    let (structural, adaptive) = end_to_end();
    results.push(("structural_advantage", structural));
    results.push(("adaptive_windows", adaptive));
    results.push(("no_leakage", no_leakage()));
    results.push(("determinism_replay", determinism_and_replay()));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} [{:02}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} checks passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
