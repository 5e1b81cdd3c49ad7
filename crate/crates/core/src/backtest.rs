//! Replay of recorded network power through the supply model.
//!
//! A single replay agent onboards and renews exactly the power recorded for
//! each day; modeled minted and circulating supply are then compared with
//! the recorded series.

use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::agents::PowerDecision;
use crate::config::{AgentConfig, ConfigError, Mode, SimulationConfig, StrategyKind};
use crate::engine::{EngineError, Simulation, Trajectory};
use crate::io::{day_index, DataError, HistoricalData};
use crate::power::AgentId;
use crate::units::{fmt_sig12, Bytes};
use crate::Day;

pub const REPLAY_AGENT: &str = "replay";

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("historical data starts on {date}, before genesis {genesis}")]
    BeforeGenesis { date: NaiveDate, genesis: NaiveDate },
}

impl BacktestError {
    pub fn is_model_breakdown(&self) -> bool {
        matches!(self, BacktestError::Engine(e) if e.is_model_breakdown())
    }
}

/// `|modeled - actual| / |actual|`, or the absolute error when `actual` is 0.
pub fn relative_error(modeled: f64, actual: f64) -> f64 {
    let diff = (modeled - actual).abs();
    if actual == 0.0 {
        diff
    } else {
        diff / actual.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub day: Day,
    pub date: NaiveDate,
    pub minted_model: f64,
    pub minted_actual: f64,
    pub minted_rel_error: f64,
    pub circulating_model: f64,
    pub circulating_actual: f64,
    pub circulating_rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub max: f64,
    pub mean: f64,
    pub max_day: Day,
}

impl ErrorStats {
    fn of(rows: &[ComparisonRow], f: impl Fn(&ComparisonRow) -> f64) -> Self {
        let mut stats = ErrorStats { max: 0.0, mean: 0.0, max_day: rows.first().map_or(0, |r| r.day) };
        for r in rows {
            let e = f(r);
            if e > stats.max || e.is_nan() {
                stats.max = e;
                stats.max_day = r.day;
            }
            stats.mean += e;
        }
        if !rows.is_empty() {
            stats.mean /= rows.len() as f64;
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub rows: Vec<ComparisonRow>,
    pub minted: ErrorStats,
    pub circulating: ErrorStats,
    pub threshold: f64,
}

impl BacktestReport {
    pub fn max_rel_error(&self) -> f64 {
        self.minted.max.max(self.circulating.max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() <= self.threshold
    }

    pub fn summary_json(&self) -> Result<String, serde_json::Error> {
        #[derive(Serialize)]
        struct Summary<'a> {
            days: usize,
            first_day: Option<Day>,
            last_day: Option<Day>,
            minted: &'a ErrorStats,
            circulating: &'a ErrorStats,
            max_rel_error: f64,
            threshold: f64,
            passed: bool,
        }
        serde_json::to_string_pretty(&Summary {
            days: self.rows.len(),
            first_day: self.rows.first().map(|r| r.day),
            last_day: self.rows.last().map(|r| r.day),
            minted: &self.minted,
            circulating: &self.circulating,
            max_rel_error: self.max_rel_error(),
            threshold: self.threshold,
            passed: self.passed(),
        })
    }

    /// Write `minted.csv`, `circulating.csv` and `error_summary.json`.
    pub fn write(&self, out_dir: &Path) -> Result<(), DataError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| DataError::Io { path, source }
        };
        std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
        type Pick = fn(&ComparisonRow) -> [f64; 3];
        let series: [(&str, Pick); 2] = [
            ("minted.csv", |r| [r.minted_model, r.minted_actual, r.minted_rel_error]),
            ("circulating.csv", |r| [r.circulating_model, r.circulating_actual, r.circulating_rel_error]),
        ];
        for (name, pick) in series {
            let path = out_dir.join(name);
            let mut w = csv::Writer::from_path(&path).map_err(|source| DataError::Csv { path: path.clone(), source })?;
            let csv_err = |source| DataError::Csv { path: path.clone(), source };
            w.write_record(["day", "date", "modeled_fil", "actual_fil", "rel_error"]).map_err(csv_err)?;
            for r in &self.rows {
                let [m, a, e] = pick(r);
                w.write_record([
                    r.day.to_string(),
                    r.date.format("%Y-%m-%d").to_string(),
                    fmt_sig12(m),
                    fmt_sig12(a),
                    fmt_sig12(e),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_err(&path))?;
        }
        let path = out_dir.join("error_summary.json");
        std::fs::write(&path, self.summary_json()? + "\n").map_err(io_err(&path))?;
        Ok(())
    }
}

/// The configuration actually replayed: the historical span, one DCA-style
/// replay agent owning all seeded power, everything else from `config`.
pub fn replay_config(config: &SimulationConfig, historical: &HistoricalData) -> Result<SimulationConfig, BacktestError> {
    let genesis = NaiveDate::parse_from_str(&config.backtest.genesis_date, "%Y-%m-%d")
        .map_err(|_| ConfigError::new("backtest.genesis_date", "expected YYYY-MM-DD"))?;
    if historical.is_empty() {
        return Err(DataError::Empty.into());
    }
    let first = historical.first_date();
    if first < genesis {
        return Err(BacktestError::BeforeGenesis { date: first, genesis });
    }
    let start_day = day_index(genesis, first);
    let mut replay = config.clone();
    replay.mode = Mode::Backtest;
    replay.start_day = start_day;
    replay.end_day = start_day + historical.len() as Day;
    replay.agents = vec![AgentConfig {
        id: REPLAY_AGENT.into(),
        strategy: StrategyKind::Dca,
        daily_onboard_rb: Bytes(0.0),
        fil_plus_fraction: 0.0,
        renewal_fraction: 0.0,
        fofr_threshold: None,
        discount_rate: None,
        candidate_durations: vec![config.backtest.sector_duration],
        capitalization_weight: 1.0,
        extra_cost_per_sector: 0.0,
    }];
    for t in &mut replay.initial_state.power {
        t.owner = REPLAY_AGENT.into();
    }
    replay.validate()?;
    Ok(replay)
}

/// Replay `historical` and compare modeled against recorded supply.
pub fn backtest(config: &SimulationConfig, historical: &HistoricalData) -> Result<(Trajectory, BacktestReport), BacktestError> {
    let replay = replay_config(config, historical)?;
    let duration = replay.backtest.sector_duration;
    let agent = AgentId::from(REPLAY_AGENT);
    let mut sim = Simulation::new(replay)?;
    for row in &historical.rows {
        sim.step_with(vec![PowerDecision {
            agent: agent.clone(),
            onboard_rb: row.onboarded_rb,
            fil_plus_fraction: row.fil_plus_share,
            duration,
            renew_rb: row.renewed_rb,
            renew_duration: duration,
            terminate_rb: 0.0,
        }])?;
    }
    let trajectory = sim.into_trajectory();
    let rows: Vec<ComparisonRow> = trajectory
        .network
        .iter()
        .zip(&historical.rows)
        .map(|(m, a)| ComparisonRow {
            day: m.day,
            date: a.date,
            minted_model: m.minted_cum,
            minted_actual: a.minted,
            minted_rel_error: relative_error(m.minted_cum, a.minted),
            circulating_model: m.circulating,
            circulating_actual: a.circulating,
            circulating_rel_error: relative_error(m.circulating, a.circulating),
        })
        .collect();
    let report = BacktestReport {
        minted: ErrorStats::of(&rows, |r| r.minted_rel_error),
        circulating: ErrorStats::of(&rows, |r| r.circulating_rel_error),
        rows,
        threshold: config.backtest.max_rel_error,
    };
    Ok((trajectory, report))
}
