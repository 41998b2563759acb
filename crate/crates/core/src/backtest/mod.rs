//! Rolling backtests, error metrics and forecast comparison tests.

pub mod dm;
pub mod export;
pub mod metrics;
pub mod panel;
pub mod rolling;

pub use dm::{diebold_mariano, diebold_mariano_newey_west, dm_test, newey_west_lag, DmResult, Favors, Loss};
pub use metrics::{hour_metrics, nrmse, nrmse_per_hour, rmse, rmse_per_hour, HourMetric};
pub use panel::ErrorPanel;
pub use export::{
    dm_table, export_backtest, missing_panel_files, panel_metrics, read_error_panel, write_dm_csv, write_metrics_csv, DmRow,
};
pub use rolling::{realized_prices, rolling_backtest, rolling_backtest_with, BacktestRun, DayFailure, PerfectForesight, PriceModel};
