//! Model-ready inputs: wind-power chain, calendar dummies, lags,
//! standardization and per-target input pre-selection.

pub mod calendar;
pub mod lags;
pub mod selection;
pub mod standardize;
pub mod wind;

pub use calendar::{CalendarFeatures, CALENDAR_COLUMNS};
pub use lags::build_lagged_features;
pub use selection::{select_inputs, FeatureColumn, FeatureSource, Target};
pub use standardize::{apply_standardizer, fit_standardizer, FeatureMatrix, Standardizer};
pub use wind::{apply_power_curve, log_profile_transform, PowerCurveTable};
