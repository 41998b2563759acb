//! Input pre-selection: which columns each LEAR target sees.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::calendar::CALENDAR_COLUMNS;
use crate::data::{Location, Quantity, Region, Site, WeatherAttribute, WeatherPanel};
use crate::error::{Error, Result};

/// A LEAR-modelled target of the model graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Target {
    Pv,
    WindOnshore,
    WindOffshore,
    Load,
    NetImports,
    PriceDirect,
    PriceSemiStructured,
}

impl Target {
    pub const QUANTITIES: [Target; 5] = [
        Target::Pv,
        Target::WindOnshore,
        Target::WindOffshore,
        Target::Load,
        Target::NetImports,
    ];

    /// Market column this target forecasts.
    pub fn quantity(self) -> Quantity {
        match self {
            Target::Pv => Quantity::Pv,
            Target::WindOnshore => Quantity::WindOnshore,
            Target::WindOffshore => Quantity::WindOffshore,
            Target::Load => Quantity::Load,
            Target::NetImports => Quantity::NetImports,
            Target::PriceDirect | Target::PriceSemiStructured => Quantity::Price,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Target::Pv => "pv",
            Target::WindOnshore => "wind_on",
            Target::WindOffshore => "wind_off",
            Target::Load => "load",
            Target::NetImports => "net_imports",
            Target::PriceDirect => "direct",
            Target::PriceSemiStructured => "semi_structured",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSource {
    /// Raw forecast attribute at a location.
    Weather { location: String, attribute: WeatherAttribute },
    /// Forecast 10 m wind speed taken to hub height and through the power
    /// curve of the location's site type.
    WindCapacityFactor { location: String },
    /// Monday = 0.
    Weekday(u8),
    Holiday,
    /// Market value at the same hour, `days` before the issue date.
    Lag { quantity: Quantity, days: u32 },
    /// A quantity forecast when predicting; the realized value in training.
    QuantityInput(Quantity),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub source: FeatureSource,
}

fn weather(loc: &Location, attribute: WeatherAttribute) -> FeatureColumn {
    FeatureColumn {
        name: format!("{attribute}@{}", loc.id),
        source: FeatureSource::Weather {
            location: loc.id.clone(),
            attribute,
        },
    }
}

fn calendar() -> impl Iterator<Item = FeatureColumn> {
    CALENDAR_COLUMNS.iter().enumerate().map(|(i, name)| FeatureColumn {
        name: (*name).to_string(),
        source: if i < 7 {
            FeatureSource::Weekday(i as u8)
        } else {
            FeatureSource::Holiday
        },
    })
}

fn lags(quantity: Quantity, lag_days: &[u32]) -> impl Iterator<Item = FeatureColumn> + '_ {
    lag_days.iter().map(move |&days| FeatureColumn {
        name: format!("{quantity}_lag{days}d"),
        source: FeatureSource::Lag { quantity, days },
    })
}

fn require<'a>(found: Vec<&'a Location>, target: Target, what: &str) -> Result<Vec<&'a Location>> {
    if found.is_empty() {
        return Err(Error::input(format!("{target} model needs {what} locations; none in the registry")));
    }
    Ok(found)
}

/// Column list for `target`. Wind and PV models get weather and their own
/// lags only; load, net imports and the price models add calendar dummies.
pub fn select_inputs(target: Target, panel: &WeatherPanel, lag_days: &[u32]) -> Result<Vec<FeatureColumn>> {
    let locs = panel.locations();
    let domestic: Vec<&Location> = locs.iter().filter(|l| l.region == Region::Domestic).collect();
    let mut cols: Vec<FeatureColumn> = Vec::new();
    match target {
        Target::Pv => {
            for l in require(domestic, target, "domestic")? {
                cols.push(weather(l, WeatherAttribute::Irradiation));
                cols.push(weather(l, WeatherAttribute::CloudCover));
            }
        }
        Target::WindOnshore | Target::WindOffshore => {
            let site = if target == Target::WindOnshore { Site::Onshore } else { Site::Offshore };
            let sites: Vec<&Location> = domestic.into_iter().filter(|l| l.site == site).collect();
            let what = if site == Site::Onshore { "domestic onshore" } else { "domestic offshore" };
            for l in require(sites, target, what)? {
                cols.push(FeatureColumn {
                    name: format!("wind_cf@{}", l.id),
                    source: FeatureSource::WindCapacityFactor { location: l.id.clone() },
                });
            }
        }
        Target::Load => {
            for l in require(domestic, target, "domestic")? {
                cols.push(weather(l, WeatherAttribute::Temperature));
            }
            cols.extend(calendar());
        }
        Target::NetImports => {
            let europe: Vec<&Location> = locs.iter().filter(|l| l.region == Region::Europe).collect();
            for l in require(europe, target, "European")? {
                for attr in WeatherAttribute::ALL {
                    cols.push(weather(l, attr));
                }
            }
            cols.extend(calendar());
        }
        Target::PriceDirect => {
            for l in locs {
                for attr in WeatherAttribute::ALL {
                    cols.push(weather(l, attr));
                }
            }
            cols.extend(calendar());
        }
        Target::PriceSemiStructured => {
            for q in Quantity::DRIVERS {
                cols.push(FeatureColumn {
                    name: format!("forecast_{q}"),
                    source: FeatureSource::QuantityInput(q),
                });
            }
            cols.extend(calendar());
        }
    }
    cols.extend(lags(target.quantity(), lag_days));
    Ok(cols)
}
