//! Ingestion, configuration, synthetic scenarios and state persistence.

pub mod config;
pub mod market;
pub mod persist;
pub mod scenario;
pub mod series;
pub mod time;
pub mod view;
pub mod weather;

pub use config::{ColdStart, DataPaths, EngineConfig};
pub use market::{load_market_csv, write_market_csv, MarketPanel, Quantity};
pub use persist::{load_state, save_state};
pub use scenario::{generate_scenario, NoiseLevels, RegimeShift, ScenarioSpec, ScenarioTruth, TrueSupplyCurve};
pub use series::HourlySeries;
pub use view::DataView;
pub use weather::{
    load_locations_csv, load_weather_csv, write_locations_csv, write_weather_csv, Location, Region, Site,
    WeatherAttribute, WeatherPanel,
};

use crate::error::{Error, Result};
use crate::features::PowerCurveTable;

/// Everything the engine reads: market history, weather runs and the power
/// curves used by the wind features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub market: MarketPanel,
    pub weather: WeatherPanel,
    pub onshore_curve: PowerCurveTable,
    pub offshore_curve: PowerCurveTable,
}

impl Dataset {
    /// Loads the files named in `config.paths`.
    pub fn load(config: &EngineConfig) -> Result<Self> {
        let p = &config.paths;
        let need = |slot: &Option<std::path::PathBuf>, name: &str| {
            slot.clone()
                .ok_or_else(|| Error::Config(format!("paths.{name} is not set")))
        };
        let locations = load_locations_csv(need(&p.locations_csv, "locations_csv")?)?;
        let weather = load_weather_csv(need(&p.weather_csv, "weather_csv")?, &locations)?;
        let market = load_market_csv(need(&p.market_csv, "market_csv")?)?;
        let onshore_curve = match &p.onshore_power_curve_csv {
            Some(path) => PowerCurveTable::from_csv(path)?,
            None => PowerCurveTable::generic_onshore(),
        };
        let offshore_curve = match &p.offshore_power_curve_csv {
            Some(path) => PowerCurveTable::from_csv(path)?,
            None => PowerCurveTable::generic_offshore(),
        };
        Ok(Dataset {
            market,
            weather,
            onshore_curve,
            offshore_curve,
        })
    }
}
