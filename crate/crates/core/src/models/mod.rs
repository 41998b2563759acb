//! The forecasting graph: LEAR ensembles for quantities and the direct and
//! semi-structured price models, the supply-curve model, and the combined
//! ensembler on top.

pub mod bundle;
pub mod engine;
pub mod inputs;
pub mod lear;
pub mod state;
pub mod structured;

pub use bundle::{
    combine_prices, compute_residual_load, read_bundles_csv, write_bundles_csv, BundleRow, ForecastBundle,
    QuantityForecast, WeightRecord, PRICE_MODELS,
};
pub use engine::{forecast_day, replay_forecast_day, run_forecast_day, train_day, TrainedDay};
pub use lear::{fit_ensembler, fit_lear_members, forecast_lear, train_lear_ensemble, EnsemblerFit, LearEnsemble, LearMembers};
pub use state::{HistoryRecord, ModelState, Node, PendingDay, SCHEMA_VERSION};
pub use structured::{
    decay_weight, fit_supply_curves, forecast_structured, hourly_pairs, train_structured, HourlyPair, StructuredModel,
    WindowCurve,
};
