//! One forecast day through the whole model graph.
//!
//! Training and forecasting are split: [`TrainedDay`] holds every fitted
//! parameter, and the forecast step is a pure function of it and the data
//! view. Replaying a stored `TrainedDay` therefore reproduces the original
//! bundle exactly.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::{compute_residual_load, BundleRow, ForecastBundle, QuantityForecast, WeightRecord};
use super::inputs::{ColumnSpec, Row, RowBuilder};
use super::lear::{fit_ensembler, fit_lear_members, EnsemblerFit, LearEnsemble};
use super::state::{ModelState, Node, PendingDay};
use super::structured::{hourly_pairs, train_structured, StructuredModel};
use crate::data::time::target_time;
use crate::data::{ColdStart, DataView, Dataset, EngineConfig};
use crate::error::{Error, Result, Stage};
use crate::features::Target;
use crate::solvers::{predict_combination, ConstraintMode};

pub const LEAR_TARGETS: [Target; 7] = [
    Target::Pv,
    Target::WindOnshore,
    Target::WindOffshore,
    Target::Load,
    Target::NetImports,
    Target::PriceDirect,
    Target::PriceSemiStructured,
];

/// Every model fitted for one issue date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedDay {
    pub issue_date: NaiveDate,
    /// Per LEAR node, one ensemble per horizon hour.
    pub lear: BTreeMap<Node, Vec<LearEnsemble>>,
    pub structured: StructuredModel,
    pub combined: Vec<EnsemblerFit>,
}

fn at(node: Node, hour: Option<usize>) -> impl Fn(Error) -> Error {
    move |e| Error::Node {
        node: node.label().to_string(),
        horizon_hour: hour,
        source: Box::new(e),
    }
}

fn fallback_config(config: &EngineConfig) -> EngineConfig {
    EngineConfig {
        cold_start: ColdStart::Fallback,
        ..config.clone()
    }
}

/// Fits the graph for `issue_date`. Ensemblers short of history always fall
/// back to equal weights here; strict mode is enforced by the caller.
pub fn train_day(state: &ModelState, builder: &RowBuilder<'_>, issue_date: NaiveDate, config: &EngineConfig) -> Result<TrainedDay> {
    let view = builder.view();
    let horizon = config.horizon_hours;
    let window = config.ensemble_window;

    let mut lear = BTreeMap::new();
    for target in LEAR_TARGETS {
        let node = Node::from_target(target);
        let spec = ColumnSpec::new(target, view, config).map_err(at(node, None))?;
        let names = spec.names();
        let fits = (1..=horizon)
            .into_par_iter()
            .map(|h| {
                let run = || -> Result<LearEnsemble> {
                    let ts = builder.training_rows(&spec, issue_date, h, config.lear_window)?;
                    let members = fit_lear_members(&ts.x, &ts.y, names.clone(), config)?;
                    let ensembler = fit_ensembler(
                        state.history(node, h),
                        members.fits.len(),
                        window,
                        ConstraintMode::SimplexFixedSum,
                        ColdStart::Fallback,
                    )?;
                    Ok(LearEnsemble {
                        horizon_hour: h,
                        members,
                        ensembler,
                    })
                };
                run().map_err(at(node, Some(h)))
            })
            .collect::<Result<Vec<_>>>()?;
        lear.insert(node, fits);
    }

    let weeks = config.decay_weeks.iter().copied().max().unwrap_or(1);
    let pairs = hourly_pairs(view, weeks);
    let histories: Vec<&[_]> = (1..=horizon).map(|h| state.history(Node::Structured, h)).collect();
    let structured = train_structured(&pairs, view.cutoff(), &histories, &fallback_config(config))
        .map_err(at(Node::Structured, None))?;

    let combined = (1..=horizon)
        .map(|h| {
            fit_ensembler(
                state.history(Node::Combined, h),
                3,
                window,
                ConstraintMode::SimplexFixedSum,
                ColdStart::Fallback,
            )
            .map_err(at(Node::Combined, Some(h)))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrainedDay {
        issue_date,
        lear,
        structured,
        combined,
    })
}

fn lambda_label(l: f64) -> String {
    format!("lambda_{l}")
}

fn push_weights(out: &mut Vec<WeightRecord>, node: Node, h: usize, labels: &[String], fit: &EnsemblerFit) {
    for (label, &w) in labels.iter().zip(&fit.weights.weights) {
        out.push(WeightRecord {
            node,
            horizon_hour: h,
            member: label.clone(),
            weight: w,
            fallback: fit.fallback,
        });
    }
    out.push(WeightRecord {
        node,
        horizon_hour: h,
        member: "intercept".into(),
        weight: fit.weights.intercept,
        fallback: fit.fallback,
    });
}

/// Applies trained models to the issue day's inputs.
pub fn forecast_day(trained: &TrainedDay, builder: &RowBuilder<'_>, config: &EngineConfig) -> Result<(ForecastBundle, PendingDay)> {
    let d = trained.issue_date;
    let view = builder.view();
    let horizon = config.horizon_hours;

    let mut specs = BTreeMap::new();
    for target in LEAR_TARGETS {
        let node = Node::from_target(target);
        let spec = ColumnSpec::new(target, view, config).map_err(at(node, None))?;
        let models = trained
            .lear
            .get(&node)
            .ok_or_else(|| Error::Internal(format!("no trained {node} model")))?;
        if models.len() != horizon {
            return Err(Error::input(format!(
                "{node} was trained for {} hours, config asks for {horizon}",
                models.len()
            )));
        }
        if models[0].members.columns != spec.names() {
            return Err(at(node, None)(Error::input("feature columns differ from the trained model")));
        }
        specs.insert(node, spec);
    }

    let lear_forecast = |node: Node, h: usize, quantities: Option<&[f64; 5]>| -> Result<(Vec<f64>, f64)> {
        let run = || -> Result<(Vec<f64>, f64)> {
            let row = match builder.row(&specs[&node], d, h, quantities)? {
                Row::Ready(r) => r,
                Row::Missing(col) => return Err(Error::input(format!("input {col} unavailable for the forecast"))),
            };
            let m = &trained.lear[&node][h - 1];
            let members = m.members.forecasts(&row)?;
            let value = predict_combination(&m.ensembler.weights, &members)?;
            Ok((members, value))
        };
        run().map_err(at(node, Some(h)))
    };

    let mut members: BTreeMap<Node, Vec<Vec<f64>>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(horizon);
    let mut weights = Vec::new();
    let mut fallback: BTreeSet<Node> = BTreeSet::new();
    let curve_labels: Vec<String> = trained.structured.curves.iter().map(|c| format!("window_{}w", c.weeks)).collect();
    let combined_labels: Vec<String> = ["direct", "semi_structured", "structured"].map(String::from).to_vec();

    for h in 1..=horizon {
        let mut q = [0.0; 5];
        for (i, target) in Target::QUANTITIES.iter().enumerate() {
            let node = Node::from_target(*target);
            let (m, v) = lear_forecast(node, h, None)?;
            members.entry(node).or_default().push(m);
            q[i] = v;
        }
        let mut qf = QuantityForecast {
            pv: q[0],
            wind_on: q[1],
            wind_off: q[2],
            load: q[3],
            net_imports: q[4],
        };
        if config.clip_nonnegative {
            qf.pv = qf.pv.max(0.0);
            qf.wind_on = qf.wind_on.max(0.0);
            qf.wind_off = qf.wind_off.max(0.0);
        }
        let rl = compute_residual_load(&qf)?;

        let (dm, direct) = lear_forecast(Node::Direct, h, None)?;
        members.entry(Node::Direct).or_default().push(dm);
        let (sm, semi) = lear_forecast(Node::SemiStructured, h, Some(&qf.drivers()))?;
        members.entry(Node::SemiStructured).or_default().push(sm);

        let st = &trained.structured;
        let structured = predict_combination(&st.hours[h - 1].weights, &st.curve_outputs(rl)).map_err(at(Node::Structured, Some(h)))?;
        let cfit = &trained.combined[h - 1];
        let triple = vec![direct, semi, structured];
        let combined = predict_combination(&cfit.weights, &triple).map_err(at(Node::Combined, Some(h)))?;
        members.entry(Node::Combined).or_default().push(triple);

        for node in [Node::Direct, Node::SemiStructured] {
            let m = &trained.lear[&node][h - 1];
            let labels: Vec<String> = m.members.fits.iter().map(|f| lambda_label(f.penalty)).collect();
            push_weights(&mut weights, node, h, &labels, &m.ensembler);
        }
        push_weights(&mut weights, Node::Structured, h, &curve_labels, &st.hours[h - 1]);
        push_weights(&mut weights, Node::Combined, h, &combined_labels, cfit);

        for (&node, ms) in &trained.lear {
            if ms[h - 1].ensembler.fallback {
                fallback.insert(node);
            }
        }
        if st.hours[h - 1].fallback {
            fallback.insert(Node::Structured);
        }
        if cfit.fallback {
            fallback.insert(Node::Combined);
        }

        rows.push(BundleRow {
            horizon_hour: h,
            target_time: target_time(d, h),
            pv: qf.pv,
            wind_on: qf.wind_on,
            wind_off: qf.wind_off,
            load: qf.load,
            net_imports: qf.net_imports,
            residual_load: rl,
            direct,
            semi_structured: semi,
            structured,
            combined,
        });
    }

    let bundle = ForecastBundle {
        issue_date: d,
        rows,
        weights,
        fallback_nodes: fallback.into_iter().collect(),
        curves: trained.structured.curves.clone(),
    };
    let pending = PendingDay {
        issue_date: d,
        resolved_hours: 0,
        members,
        curves: trained.structured.curves.clone(),
    };
    Ok((bundle, pending))
}

/// First ensembler still on cold-start weights: (node, hour, records held).
fn first_fallback(state: &ModelState, trained: &TrainedDay) -> Option<(Node, usize, usize)> {
    let hit = |node: Node, h: usize, fb: bool| fb.then(|| (node, h, state.history(node, h).len()));
    for (&node, ms) in &trained.lear {
        if let Some(x) = ms.iter().find_map(|m| hit(node, m.horizon_hour, m.ensembler.fallback)) {
            return Some(x);
        }
    }
    let s = trained.structured.hours.iter().enumerate().find_map(|(i, f)| hit(Node::Structured, i + 1, f.fallback));
    s.or_else(|| trained.combined.iter().enumerate().find_map(|(i, f)| hit(Node::Combined, i + 1, f.fallback)))
}

/// Retrains the graph for `issue_date` and emits its bundle.
///
/// Pending forecasts whose targets realized before the cutoff are first
/// moved into the histories. On success the state advances to
/// `issue_date`. In strict cold-start mode a day whose ensemblers lack
/// history still advances the state, so that histories keep filling, but
/// returns an ensembler-stage error instead of the bundle.
pub fn run_forecast_day(state: &mut ModelState, data: &Dataset, issue_date: NaiveDate, config: &EngineConfig) -> Result<ForecastBundle> {
    config.validate()?;
    if state.horizon_hours != config.horizon_hours {
        return Err(Error::Config(format!(
            "state tracks {} horizon hours, config asks for {}",
            state.horizon_hours, config.horizon_hours
        )));
    }
    if let Some(last) = state.last_issue_date {
        if issue_date <= last {
            return Err(Error::input(format!(
                "state has already advanced to {last}; issue dates must increase"
            )));
        }
    }
    let view = DataView::for_issue_date(data, issue_date);
    let mut next = state.clone();
    next.resolve(&view, config.ensemble_window);
    let builder = RowBuilder::new(view, config);
    let trained = train_day(&next, &builder, issue_date, config)?;
    let (bundle, pending) = forecast_day(&trained, &builder, config)?;

    let strict_gap = match config.cold_start {
        ColdStart::Strict => first_fallback(&next, &trained),
        ColdStart::Fallback => None,
    };
    next.pending.push(pending);
    next.last_issue_date = Some(issue_date);
    next.trained = Some(trained);
    *state = next;

    if let Some((node, h, n)) = strict_gap {
        return Err(at(node, Some(h))(Error::training(
            Stage::Ensembler,
            format!("needs {} realized observations, found {n}", config.ensemble_window),
        )));
    }
    Ok(bundle)
}

/// Re-emits the bundle of the state's last trained day without retraining.
pub fn replay_forecast_day(state: &ModelState, data: &Dataset, issue_date: NaiveDate, config: &EngineConfig) -> Result<ForecastBundle> {
    let trained = state
        .trained
        .as_ref()
        .ok_or_else(|| Error::input("state holds no trained models"))?;
    if trained.issue_date != issue_date {
        return Err(Error::input(format!(
            "state holds models for {}, not {issue_date}",
            trained.issue_date
        )));
    }
    let builder = RowBuilder::new(DataView::for_issue_date(data, issue_date), config);
    Ok(forecast_day(trained, &builder, config)?.0)
}
