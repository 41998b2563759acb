//! Command-line driver: backtests, single forecast days, reports and
//! synthetic data.

mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use structcast::backtest::{export_backtest, rolling_backtest, Loss};
use structcast::data::{
    generate_scenario, load_state, save_state, write_locations_csv, write_market_csv, write_weather_csv, DataPaths,
    Dataset, EngineConfig, ScenarioSpec,
};
use structcast::models::{replay_forecast_day, run_forecast_day, write_bundles_csv, ModelState};
use structcast::{Error, ErrorKind, Result};

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  data error (missing, malformed or insufficient input; corrupt state)
  2  usage error (bad arguments or configuration)
  3  training error (a model could not be fitted)
  4  internal error";

#[derive(Parser)]
#[command(name = "structcast", version, about = "Structured day-ahead electricity price forecasting", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Engine configuration (TOML).
    #[arg(long, env = "STRUCTCAST_CONFIG")]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Squared,
    Absolute,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Loss {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Absolute => Loss::Absolute,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rolling daily-retrain backtest over [start, end].
    #[command(after_help = EXIT_CODES)]
    Backtest {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        start: NaiveDate,
        #[arg(long)]
        end: NaiveDate,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Loss of the Diebold–Mariano tables.
        #[arg(long, value_enum, default_value = "squared")]
        loss: LossArg,
    },
    /// Forecasts one issue day and advances the saved state.
    ///
    /// If the state already holds the models of this issue day the bundle is
    /// replayed without retraining. A missing state file starts from scratch.
    #[command(after_help = EXIT_CODES)]
    Forecast {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        issue_date: NaiveDate,
        #[arg(long)]
        state: PathBuf,
        /// Bundle CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Metric, test, weight and curve tables from a backtest directory.
    #[command(after_help = EXIT_CODES)]
    Report {
        dir: PathBuf,
        /// Also render SVG charts.
        #[arg(long)]
        charts: bool,
        #[arg(long, value_enum, default_value = "squared")]
        loss: LossArg,
        /// Horizon length the backtest used.
        #[arg(long, default_value_t = 72)]
        horizon_hours: usize,
    },
    /// Writes a synthetic dataset and a config that points at it.
    #[command(after_help = EXIT_CODES)]
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Scenario description (TOML); defaults apply to absent fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        days: Option<usize>,
    },
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Data => 1,
        ErrorKind::Usage => 2,
        ErrorKind::Training => 3,
        ErrorKind::Internal => 4,
    }
}

fn kind_label(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Data => "data",
        ErrorKind::Usage => "usage",
        ErrorKind::Training => "training",
        ErrorKind::Internal => "internal",
    }
}

fn load_config_and_data(path: &Path) -> Result<(EngineConfig, Dataset)> {
    let config = EngineConfig::load(path)?;
    let data = Dataset::load(&config)?;
    Ok((config, data))
}

fn cmd_backtest(config: &Path, start: NaiveDate, end: NaiveDate, out: &Path, loss: Loss) -> Result<()> {
    if end < start {
        return Err(Error::Config(format!("end date {end} is before start date {start}")));
    }
    let (config, data) = load_config_and_data(config)?;
    let run = rolling_backtest(&data, start, end, &config)?;
    if run.panel.is_empty() {
        let first = run.failures.iter().find(|f| f.scored).map(|f| f.message.clone()).unwrap_or_default();
        return Err(Error::input(format!("no scored day succeeded; first failure: {first}")));
    }
    export_backtest(&run, out, loss)?;
    let excluded = run.failures.iter().filter(|f| f.scored).count();
    eprintln!(
        "scored {} issue days from {start} to {end}, {excluded} excluded; results in {}",
        run.panel.len(),
        out.display()
    );
    Ok(())
}

fn cmd_forecast(config: &Path, issue_date: NaiveDate, state_path: &Path, out: &Path) -> Result<()> {
    let (config, data) = load_config_and_data(config)?;
    let mut state = if state_path.exists() {
        load_state(state_path)?
    } else {
        ModelState::new(config.horizon_hours)
    };
    let holds_day = state.trained.as_ref().is_some_and(|t| t.issue_date == issue_date);
    let bundle = if holds_day {
        replay_forecast_day(&state, &data, issue_date, &config)?
    } else {
        let b = run_forecast_day(&mut state, &data, issue_date, &config);
        // strict-mode failures still advance the histories
        if state.last_issue_date == Some(issue_date) {
            save_state(&state, state_path)?;
        }
        b?
    };
    write_bundles_csv(out, std::slice::from_ref(&bundle))
}

fn cmd_generate(out: &Path, spec: Option<&Path>, seed: Option<u64>, days: Option<usize>) -> Result<()> {
    let mut spec: ScenarioSpec = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => ScenarioSpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(d) = days {
        spec.n_days = d;
    }
    let (data, _) = generate_scenario(&spec)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_locations_csv(data.weather.locations(), out.join("locations.csv"))?;
    write_weather_csv(&data.weather, out.join("weather.csv"))?;
    write_market_csv(&data.market, out.join("market.csv"))?;
    let config = EngineConfig {
        holidays: spec.holidays.clone(),
        paths: DataPaths {
            market_csv: Some("market.csv".into()),
            weather_csv: Some("weather.csv".into()),
            locations_csv: Some("locations.csv".into()),
            ..DataPaths::default()
        },
        ..EngineConfig::default()
    };
    let path = out.join("config.toml");
    std::fs::write(&path, config.to_toml_string()?).map_err(|e| Error::io(&path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Backtest {
            config,
            start,
            end,
            out,
            loss,
        } => cmd_backtest(&config.config, start, end, &out, loss.into()),
        Command::Forecast {
            config,
            issue_date,
            state,
            out,
        } => cmd_forecast(&config.config, issue_date, &state, &out),
        Command::Report {
            dir,
            charts,
            loss,
            horizon_hours,
        } => report::cmd_report(&dir, charts, loss.into(), horizon_hours),
        Command::Generate { out, spec, seed, days } => cmd_generate(&out, spec.as_deref(), seed, days),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let summary = serde_json::json!({
                "error": {
                    "kind": kind_label(kind),
                    "exit_code": exit_code(kind),
                    "message": e.to_string(),
                }
            });
            eprintln!("{summary}");
            ExitCode::from(exit_code(kind))
        }
    }
}
