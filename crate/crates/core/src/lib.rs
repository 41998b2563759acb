//! Structured day-ahead electricity price forecasting.

pub mod backtest;
pub mod data;
pub mod error;
pub mod features;
pub mod models;
pub mod solvers;

pub use error::{Error, ErrorKind, Result, Stage};
