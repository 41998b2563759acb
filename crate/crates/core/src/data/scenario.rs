//! Synthetic market and weather panels with a known price formation.
//!
//! All randomness comes from a ChaCha8 stream seeded by `ScenarioSpec::seed`
//! and drawn in a fixed order, so a spec determines its panels.
//!
//! Weather at each location is a seasonal and diurnal cycle plus AR(1)
//! anomalies shared within a region. Forecast runs are issued daily at
//! 23:00 UTC; their errors follow an AR(1) in lead time and so grow with
//! lead. Quantities are driven by the true weather: PV by irradiation, wind
//! through the log profile and the power curves, load by temperature and the
//! calendar, net imports linearly by European weather. The price is
//! `scale(t) · curve(residual load) + noise`, where `scale` follows the
//! regime schedule.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::time::{cutoff, weather_issue_time};
use super::{Dataset, Location, MarketPanel, Quantity, Region, Site, WeatherAttribute, WeatherPanel};
use crate::error::{Error, Result};
use crate::features::{apply_power_curve, log_profile_transform, PowerCurveTable};

/// Piecewise-linear, non-decreasing map from residual load (MW) to price
/// (EUR/MWh), extended linearly beyond its end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueSupplyCurve {
    pub points: Vec<(f64, f64)>,
}

impl TrueSupplyCurve {
    /// A convex merit order: flat for renewables and lignite, steep once
    /// gas peakers set the price.
    pub fn convex() -> Self {
        TrueSupplyCurve {
            points: vec![
                (-30_000.0, -40.0),
                (0.0, 5.0),
                (20_000.0, 40.0),
                (35_000.0, 80.0),
                (45_000.0, 130.0),
                (55_000.0, 220.0),
                (65_000.0, 380.0),
                (85_000.0, 800.0),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::input("true supply curve needs at least two points"));
        }
        if self.points.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
            return Err(Error::input(
                "true supply curve must have increasing loads and non-decreasing prices",
            ));
        }
        Ok(())
    }

    pub fn eval(&self, rl: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|&(x, _)| x <= rl).clamp(1, p.len() - 1);
        let (x0, y0) = p[i - 1];
        let (x1, y1) = p[i];
        y0 + (y1 - y0) * (rl - x0) / (x1 - x0)
    }
}

/// From day offset `day` (0 = first day) on, prices are scaled by `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeShift {
    pub day: usize,
    pub scale: f64,
}

/// Standard deviations of the noise terms. PV and wind noise are relative;
/// `weather` scales the forecast errors (0 gives perfect forecasts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevels {
    pub price: f64,
    pub load: f64,
    pub pv: f64,
    pub wind: f64,
    pub net_imports: f64,
    pub weather: f64,
}

impl NoiseLevels {
    pub fn zero() -> Self {
        NoiseLevels {
            price: 0.0,
            load: 0.0,
            pv: 0.0,
            wind: 0.0,
            net_imports: 0.0,
            weather: 0.0,
        }
    }
}

impl Default for NoiseLevels {
    fn default() -> Self {
        NoiseLevels {
            price: 5.0,
            load: 800.0,
            pv: 0.03,
            wind: 0.05,
            net_imports: 500.0,
            weather: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub start_date: NaiveDate,
    pub n_days: usize,
    pub domestic_onshore: usize,
    pub domestic_offshore: usize,
    pub european: usize,
    pub max_lead: usize,
    pub pv_capacity_mw: f64,
    pub wind_onshore_capacity_mw: f64,
    pub wind_offshore_capacity_mw: f64,
    pub curve: TrueSupplyCurve,
    pub regimes: Vec<RegimeShift>,
    pub noise: NoiseLevels,
    pub holidays: Vec<NaiveDate>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 1,
            start_date: NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date"),
            n_days: 200,
            domestic_onshore: 3,
            domestic_offshore: 1,
            european: 4,
            max_lead: 72,
            pv_capacity_mw: 60_000.0,
            wind_onshore_capacity_mw: 55_000.0,
            wind_offshore_capacity_mw: 8_000.0,
            curve: TrueSupplyCurve::convex(),
            regimes: Vec::new(),
            noise: NoiseLevels::default(),
            holidays: Vec::new(),
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.curve.validate()?;
        if self.n_days == 0 || self.max_lead == 0 {
            return Err(Error::input("scenario needs at least one day and a positive lead"));
        }
        if self.domestic_onshore + self.domestic_offshore == 0 || self.european == 0 {
            return Err(Error::input("scenario needs domestic and European locations"));
        }
        if self.regimes.windows(2).any(|w| w[1].day <= w[0].day) {
            return Err(Error::input("regime schedule must be sorted by day"));
        }
        if self.regimes.iter().any(|r| !(r.scale > 0.0 && r.scale.is_finite())) {
            return Err(Error::input("regime scales must be positive"));
        }
        let n = &self.noise;
        if [n.price, n.load, n.pv, n.wind, n.net_imports, n.weather]
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::input("noise levels must be non-negative"));
        }
        Ok(())
    }

    /// Price multiplier in effect on day offset `day`.
    pub fn scale_on(&self, day: usize) -> f64 {
        self.regimes
            .iter()
            .rev()
            .find(|r| r.day <= day)
            .map_or(1.0, |r| r.scale)
    }
}

/// Ground truth behind a generated dataset, hour-aligned with the market
/// panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTruth {
    pub scale: Vec<f64>,
    pub residual_load: Vec<f64>,
    /// `scale · curve(residual load)`, before price noise.
    pub noiseless_price: Vec<f64>,
}

fn locations(spec: &ScenarioSpec) -> Vec<Location> {
    let mut out = Vec::new();
    for i in 0..spec.domestic_onshore {
        let f = i as f64 / spec.domestic_onshore.max(1) as f64;
        out.push(Location {
            id: format!("dom_on_{}", i + 1),
            latitude: 48.0 + 6.0 * f,
            longitude: 7.0 + 6.0 * ((f * 2.7) % 1.0),
            roughness_length_m: 0.1 + 0.2 * f,
            region: Region::Domestic,
            hub_height_m: None,
            site: Site::Onshore,
        });
    }
    for i in 0..spec.domestic_offshore {
        out.push(Location {
            id: format!("dom_off_{}", i + 1),
            latitude: 54.5 + 0.3 * i as f64,
            longitude: 6.5 + 0.8 * i as f64,
            roughness_length_m: 0.0002,
            region: Region::Domestic,
            hub_height_m: None,
            site: Site::Offshore,
        });
    }
    for i in 0..spec.european {
        let f = i as f64 / spec.european as f64;
        out.push(Location {
            id: format!("eu_{}", i + 1),
            latitude: 44.0 + 12.0 * ((f * 1.9) % 1.0),
            longitude: -2.0 + 22.0 * f,
            roughness_length_m: 0.15,
            region: Region::Europe,
            hub_height_m: None,
            site: Site::Onshore,
        });
    }
    out
}

/// AR(1) series with coefficient `phi` and innovation sd `sigma`, started
/// from its stationary distribution.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, sigma: f64) -> Vec<f64> {
    let mut x = sigma / (1.0 - phi * phi).sqrt() * gauss(rng);
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + sigma * gauss(rng);
            v
        })
        .collect()
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-9, 1.0 - 1e-9);
    (p / (1.0 - p)).ln()
}

/// Latent weather state of one location for one hour; attributes are
/// deterministic functions of it.
#[derive(Clone, Copy)]
struct Latent {
    temperature: f64,
    cloud_logit: f64,
    wind_log: f64,
}

fn clear_sky(loc: &Location, t: chrono::DateTime<chrono::Utc>) -> f64 {
    let doy = t.ordinal() as f64;
    let decl = (23.44 * (2.0 * PI * (doy - 81.0) / 365.0).sin()).to_radians();
    let hour = t.hour() as f64 + 0.5;
    let angle = (15.0 * (hour + loc.longitude / 15.0 - 12.0)).to_radians();
    let lat = loc.latitude.to_radians();
    let sin_el = lat.sin() * decl.sin() + lat.cos() * decl.cos() * angle.cos();
    if sin_el <= 0.0 {
        0.0
    } else {
        1000.0 * sin_el.powf(1.2)
    }
}

fn attributes(loc: &Location, t: chrono::DateTime<chrono::Utc>, s: Latent) -> [f64; 4] {
    let cloud = logistic(s.cloud_logit);
    let irradiation = clear_sky(loc, t) * (1.0 - 0.7 * cloud);
    let wind = s.wind_log.exp();
    [irradiation, cloud, wind, s.temperature]
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(Dataset, ScenarioTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let locs = locations(spec);
    let n_loc = locs.len();
    let t0 = cutoff(spec.start_date);
    let n_market = spec.n_days * 24;
    // truth must cover the last run's longest lead
    let n_truth = n_market + spec.max_lead + 24;

    let regional = |rng: &mut ChaCha8Rng| {
        (
            ar1(rng, n_truth, 0.995, 0.15),
            ar1(rng, n_truth, 0.95, 0.35),
            ar1(rng, n_truth, 0.97, 0.07),
        )
    };
    let dom = regional(&mut rng);
    let eu = regional(&mut rng);

    let mut truth: Vec<Vec<Latent>> = Vec::with_capacity(n_loc);
    for loc in &locs {
        let (rt, rc, rw) = if loc.region == Region::Domestic { &dom } else { &eu };
        let lt = ar1(&mut rng, n_truth, 0.9, 0.3);
        let lc = ar1(&mut rng, n_truth, 0.9, 0.4);
        let lw = ar1(&mut rng, n_truth, 0.9, 0.04);
        let base_wind = if loc.site == Site::Offshore { 2.0 } else { 1.55 };
        let series = (0..n_truth)
            .map(|i| {
                let t = t0 + Duration::hours(i as i64);
                let doy = t.ordinal() as f64;
                let hour = t.hour() as f64;
                let seasonal = 9.0 + 9.0 * (2.0 * PI * (doy - 105.0) / 365.25).sin() - 0.4 * (loc.latitude - 50.0);
                let diurnal = 4.0 * (2.0 * PI * (hour - 9.0) / 24.0).sin();
                Latent {
                    temperature: seasonal + diurnal + rt[i] + lt[i],
                    cloud_logit: 0.2 + rc[i] + lc[i],
                    wind_log: base_wind + 0.1 * (2.0 * PI * (doy - 15.0) / 365.25).cos() + 2.5 * (rw[i] + lw[i]),
                }
            })
            .collect();
        truth.push(series);
    }

    // forecast runs
    let mut weather = WeatherPanel::new(locs.clone(), spec.max_lead)?;
    let ew = spec.noise.weather;
    for d in 0..spec.n_days {
        let date = spec.start_date + Duration::days(d as i64);
        let issue = weather_issue_time(date);
        let mut run = vec![0.0; spec.max_lead * n_loc * 4];
        for (li, loc) in locs.iter().enumerate() {
            let (mut et, mut ec, mut ewind) = (0.0, 0.0, 0.0);
            for lead in 1..=spec.max_lead {
                et = 0.97 * et + 0.4 * ew * gauss(&mut rng);
                ec = 0.97 * ec + 0.25 * ew * gauss(&mut rng);
                ewind = 0.97 * ewind + 0.035 * ew * gauss(&mut rng);
                let valid = issue + Duration::hours(lead as i64);
                let idx = (valid - t0).num_hours();
                let s = if idx >= 0 {
                    let s = truth[li][idx as usize];
                    Latent {
                        temperature: s.temperature + et,
                        cloud_logit: logit(logistic(s.cloud_logit)) + ec,
                        wind_log: s.wind_log + ewind,
                    }
                } else {
                    truth[li][0]
                };
                let attrs = attributes(loc, valid, s);
                let off = ((lead - 1) * n_loc + li) * 4;
                run[off..off + 4].copy_from_slice(&attrs);
            }
        }
        weather.insert_run(issue, run)?;
    }

    // quantities and price from the true weather
    let onshore = PowerCurveTable::generic_onshore();
    let offshore = PowerCurveTable::generic_offshore();
    let holidays: BTreeSet<NaiveDate> = spec.holidays.iter().copied().collect();
    let idx_of = |pred: &dyn Fn(&Location) -> bool| -> Vec<usize> {
        locs.iter().enumerate().filter(|(_, l)| pred(l)).map(|(i, _)| i).collect()
    };
    let dom_all = idx_of(&|l| l.region == Region::Domestic);
    let dom_on = idx_of(&|l| l.region == Region::Domestic && l.site == Site::Onshore);
    let dom_off = idx_of(&|l| l.region == Region::Domestic && l.site == Site::Offshore);
    let eu_all = idx_of(&|l| l.region == Region::Europe);

    let mut cols: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(n_market));
    let mut scale = Vec::with_capacity(n_market);
    let mut rl_truth = Vec::with_capacity(n_market);
    let mut noiseless = Vec::with_capacity(n_market);
    let nz = spec.noise;
    for i in 0..n_market {
        let t = t0 + Duration::hours(i as i64);
        let attrs: Vec<[f64; 4]> = locs.iter().enumerate().map(|(li, l)| attributes(l, t, truth[li][i])).collect();
        let mean = |ids: &[usize], a: WeatherAttribute| {
            if ids.is_empty() {
                0.0
            } else {
                ids.iter().map(|&k| attrs[k][a.index()]).sum::<f64>() / ids.len() as f64
            }
        };
        let cf = |ids: &[usize], hub: f64, curve: &PowerCurveTable| -> Result<f64> {
            if ids.is_empty() {
                return Ok(0.0);
            }
            let mut s = 0.0;
            for &k in ids {
                let v = log_profile_transform(attrs[k][WeatherAttribute::WindSpeed10m.index()], locs[k].roughness_length_m, hub)?;
                s += apply_power_curve(v, curve)?;
            }
            Ok(s / ids.len() as f64)
        };

        let pv = (spec.pv_capacity_mw * mean(&dom_all, WeatherAttribute::Irradiation) / 1000.0 * (1.0 + nz.pv * gauss(&mut rng))).max(0.0);
        let wind_on = (spec.wind_onshore_capacity_mw * cf(&dom_on, 100.0, &onshore)? * (1.0 + nz.wind * gauss(&mut rng))).max(0.0);
        let wind_off = (spec.wind_offshore_capacity_mw * cf(&dom_off, 120.0, &offshore)? * (1.0 + nz.wind * gauss(&mut rng))).max(0.0);

        let temp = mean(&dom_all, WeatherAttribute::Temperature);
        let date = t.date_naive();
        let hour = t.hour() as f64;
        let weekday = date.weekday().num_days_from_monday();
        let calendar = match weekday {
            5 => -6_000.0,
            6 => -9_000.0,
            _ => 0.0,
        } + if holidays.contains(&date) { -8_000.0 } else { 0.0 };
        let profile = 0.5 - 0.5 * (2.0 * PI * (hour - 3.0) / 24.0).cos();
        let load = 48_000.0 + 900.0 * (14.0 - temp).max(0.0) + 400.0 * (temp - 22.0).max(0.0) + 14_000.0 * profile
            + calendar
            + nz.load * gauss(&mut rng);

        let net_imports = 2_000.0
            + 600.0 * (mean(&eu_all, WeatherAttribute::WindSpeed10m) - 5.0)
            + 5.0 * (mean(&eu_all, WeatherAttribute::Irradiation) - 150.0)
            - 100.0 * (mean(&eu_all, WeatherAttribute::Temperature) - 10.0)
            - 1_500.0 * mean(&eu_all, WeatherAttribute::CloudCover)
            + nz.net_imports * gauss(&mut rng);

        let rl = load - pv - wind_on - wind_off - net_imports;
        let s = spec.scale_on(i / 24);
        let clean = s * spec.curve.eval(rl);
        let price = clean + nz.price * gauss(&mut rng);

        cols[Quantity::Price.index()].push(price);
        cols[Quantity::Load.index()].push(load);
        cols[Quantity::Pv.index()].push(pv);
        cols[Quantity::WindOnshore.index()].push(wind_on);
        cols[Quantity::WindOffshore.index()].push(wind_off);
        cols[Quantity::NetImports.index()].push(net_imports);
        scale.push(s);
        rl_truth.push(rl);
        noiseless.push(clean);
    }

    let market = MarketPanel::new(t0, cols)?;
    Ok((
        Dataset {
            market,
            weather,
            onshore_curve: onshore,
            offshore_curve: offshore,
        },
        ScenarioTruth {
            scale,
            residual_load: rl_truth,
            noiseless_price: noiseless,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            seed,
            n_days: 20,
            ..ScenarioSpec::default()
        }
    }

    #[test]
    fn same_seed_same_panels() {
        let (a, _) = generate_scenario(&small(3)).unwrap();
        let (b, _) = generate_scenario(&small(3)).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_scenario(&small(4)).unwrap();
        assert_ne!(a.market, c.market);
    }

    #[test]
    fn noiseless_price_is_the_curve() {
        let spec = ScenarioSpec {
            noise: NoiseLevels::zero(),
            ..small(5)
        };
        let (ds, truth) = generate_scenario(&spec).unwrap();
        for i in 0..ds.market.len() {
            let t = ds.market.timestamp(i);
            let rl = ds.market.residual_load(t).unwrap();
            assert_eq!(ds.market.column(Quantity::Price)[i], spec.curve.eval(rl));
            assert_eq!(truth.residual_load[i], rl);
        }
    }

    #[test]
    fn regimes_follow_their_curves() {
        let spec = ScenarioSpec {
            noise: NoiseLevels::zero(),
            regimes: vec![RegimeShift { day: 10, scale: 2.0 }],
            ..small(6)
        };
        let (ds, _) = generate_scenario(&spec).unwrap();
        for i in 0..ds.market.len() {
            let rl = ds.market.residual_load(ds.market.timestamp(i)).unwrap();
            let expected = if i < 240 { spec.curve.eval(rl) } else { 2.0 * spec.curve.eval(rl) };
            assert_eq!(ds.market.column(Quantity::Price)[i], expected);
        }
    }

    #[test]
    fn panels_are_well_formed() {
        let (ds, _) = generate_scenario(&small(7)).unwrap();
        assert_eq!(ds.market.len(), 20 * 24);
        assert_eq!(ds.weather.issue_times().count(), 20);
        assert_eq!(ds.weather.locations().len(), 8);
        let pv = ds.market.column(Quantity::Pv);
        assert!(pv.iter().all(|&v| v >= 0.0));
        // PV is zero at night
        assert!(pv.iter().any(|&v| v == 0.0));
        assert!(pv.iter().any(|&v| v > 1000.0));
    }

    #[test]
    fn perfect_forecasts_without_weather_noise() {
        let spec = ScenarioSpec {
            noise: NoiseLevels {
                weather: 0.0,
                ..NoiseLevels::default()
            },
            ..small(8)
        };
        let (a, _) = generate_scenario(&spec).unwrap();
        let (b, _) = generate_scenario(&ScenarioSpec {
            noise: NoiseLevels {
                weather: 0.0,
                ..NoiseLevels::default()
            },
            seed: 8,
            n_days: 21,
            ..ScenarioSpec::default()
        })
        .unwrap();
        // valid-time agreement between the day-1 lead-25 cell and the day-2 lead-1 cell
        let d1 = weather_issue_time(spec.start_date);
        let d2 = weather_issue_time(spec.start_date + Duration::days(1));
        for attr in WeatherAttribute::ALL {
            let x = a.weather.raw(d1, 25, 0, attr).unwrap();
            let y = a.weather.raw(d2, 1, 0, attr).unwrap();
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{attr}: {x} vs {y}");
        }
        assert!(b.market.len() > a.market.len());
    }

    #[test]
    fn curve_validation() {
        assert!(TrueSupplyCurve { points: vec![(0.0, 1.0), (1.0, 0.5)] }.validate().is_err());
        let c = TrueSupplyCurve::convex();
        c.validate().unwrap();
        assert_eq!(c.eval(0.0), 5.0);
        assert_eq!(c.eval(10_000.0), 22.5);
        assert!(c.eval(100_000.0) > 800.0);
    }
}
