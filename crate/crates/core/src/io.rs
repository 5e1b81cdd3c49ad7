//! File formats: historical network data, trajectory outputs and summaries.
//!
//! Units are converted here and nowhere else: files carry EiB/PiB and FIL,
//! everything in memory is bytes and FIL. Numbers are written with 12
//! significant digits.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::config::SimulationConfig;
use crate::engine::{NetworkRecord, Trajectory};
use crate::units::{fmt_sig12, EIB, PIB};
use crate::Day;

pub const HISTORICAL_COLUMNS: [&str; 11] = [
    "date",
    "rbp_eib",
    "qap_eib",
    "onboarded_rb_pib",
    "renewed_rb_pib",
    "fil_plus_share",
    "circulating_supply_fil",
    "minted_fil",
    "vested_fil",
    "locked_fil",
    "burnt_fil",
];

/// Columns a historical file must carry; the rest may be absent or blank.
pub const REQUIRED_HISTORICAL_COLUMNS: [&str; 6] = [
    "date",
    "onboarded_rb_pib",
    "renewed_rb_pib",
    "fil_plus_share",
    "circulating_supply_fil",
    "minted_fil",
];

pub const NETWORK_COLUMNS: [&str; 11] = [
    "day",
    "rbp_bytes",
    "qap_bytes",
    "baseline_bytes",
    "delta_minted_fil",
    "minted_cum_fil",
    "vested_cum_fil",
    "locked_reward_fil",
    "locked_collateral_fil",
    "burnt_cum_fil",
    "circulating_fil",
];

pub const AGENT_COLUMNS: [&str; 8] = [
    "day",
    "agent_id",
    "qap_bytes",
    "daily_reward_fil",
    "cum_reward_fil",
    "pledge_outstanding_fil",
    "borrow_cost_cum_fil",
    "net_cum_reward_fil",
];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("line {line}: cannot parse date `{text}` (expected YYYY-MM-DD)")]
    BadDate { line: usize, text: String },
    #[error("line {line}: column `{column}`: cannot parse `{text}` as a number")]
    BadNumber { line: usize, column: String, text: String },
    #[error("line {line}: column `{column}` must be finite and non-negative, got {value}")]
    NegativeValue { line: usize, column: String, value: f64 },
    #[error("line {line}: date {found} is not after the previous row's {previous}")]
    NotIncreasing { line: usize, previous: NaiveDate, found: NaiveDate },
    #[error("line {line}: missing day(s) {first}..={last} before {found}")]
    Gap { line: usize, first: NaiveDate, last: NaiveDate, found: NaiveDate },
    #[error("historical data has no rows")]
    Empty,
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv { path: path.to_path_buf(), source }
}

/// One day of recorded network statistics, in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalRow {
    pub date: NaiveDate,
    pub rbp: Option<f64>,
    pub qap: Option<f64>,
    pub onboarded_rb: f64,
    pub renewed_rb: f64,
    pub fil_plus_share: f64,
    pub circulating: f64,
    pub minted: f64,
    pub vested: Option<f64>,
    pub locked: Option<f64>,
    pub burnt: Option<f64>,
}

/// Validated daily history: strictly increasing dates with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalData {
    pub rows: Vec<HistoricalRow>,
}

impl HistoricalData {
    pub fn first_date(&self) -> NaiveDate {
        self.rows[0].date
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Day index of `date` counted from `genesis`.
pub fn day_index(genesis: NaiveDate, date: NaiveDate) -> Day {
    (date - genesis).num_days()
}

pub fn load_historical(path: &Path) -> Result<HistoricalData, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_historical(file, path)
}

/// Parse historical CSV from any reader; `origin` is used in messages.
pub fn read_historical<R: std::io::Read>(reader: R, origin: &Path) -> Result<HistoricalData, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err(origin))?.clone();
    let mut index = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if !HISTORICAL_COLUMNS.contains(&h) {
            return Err(DataError::UnknownColumn(h.to_string()));
        }
        index.insert(h.to_string(), i);
    }
    for col in REQUIRED_HISTORICAL_COLUMNS {
        if !index.contains_key(col) {
            return Err(DataError::MissingColumn(col.to_string()));
        }
    }

    let mut rows: Vec<HistoricalRow> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err(origin))?;
        // header is line 1
        let line = i + 2;
        let cell = |col: &str| index.get(col).and_then(|&j| record.get(j)).unwrap_or("");
        let number = |col: &str| -> Result<Option<f64>, DataError> {
            let text = cell(col);
            if text.is_empty() {
                return Ok(None);
            }
            let value: f64 = text.parse().map_err(|_| DataError::BadNumber {
                line,
                column: col.to_string(),
                text: text.to_string(),
            })?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(DataError::NegativeValue { line, column: col.to_string(), value });
            }
            Ok(Some(value))
        };
        let required = |col: &str| -> Result<f64, DataError> {
            number(col)?.ok_or_else(|| DataError::BadNumber { line, column: col.to_string(), text: String::new() })
        };
        let text = cell("date");
        let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
            .map_err(|_| DataError::BadDate { line, text: text.to_string() })?;
        if let Some(prev) = rows.last() {
            if date <= prev.date {
                return Err(DataError::NotIncreasing { line, previous: prev.date, found: date });
            }
            if date - prev.date > Duration::days(1) {
                return Err(DataError::Gap {
                    line,
                    first: prev.date + Duration::days(1),
                    last: date - Duration::days(1),
                    found: date,
                });
            }
        }
        let fil_plus_share = required("fil_plus_share")?;
        if fil_plus_share > 1.0 {
            return Err(DataError::NegativeValue {
                line,
                column: "fil_plus_share (must be <= 1)".into(),
                value: fil_plus_share,
            });
        }
        rows.push(HistoricalRow {
            date,
            rbp: number("rbp_eib")?.map(|v| v * EIB),
            qap: number("qap_eib")?.map(|v| v * EIB),
            onboarded_rb: required("onboarded_rb_pib")? * PIB,
            renewed_rb: required("renewed_rb_pib")? * PIB,
            fil_plus_share,
            circulating: required("circulating_supply_fil")?,
            minted: required("minted_fil")?,
            vested: number("vested_fil")?,
            locked: number("locked_fil")?,
            burnt: number("burnt_fil")?,
        });
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(HistoricalData { rows })
}

fn opt(v: Option<f64>, scale: f64) -> String {
    v.map(|x| fmt_sig12(x / scale)).unwrap_or_default()
}

pub fn write_historical(data: &HistoricalData, path: &Path) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(HISTORICAL_COLUMNS).map_err(csv_err(path))?;
    for r in &data.rows {
        w.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            opt(r.rbp, EIB),
            opt(r.qap, EIB),
            fmt_sig12(r.onboarded_rb / PIB),
            fmt_sig12(r.renewed_rb / PIB),
            fmt_sig12(r.fil_plus_share),
            fmt_sig12(r.circulating),
            fmt_sig12(r.minted),
            opt(r.vested, 1.0),
            opt(r.locked, 1.0),
            opt(r.burnt, 1.0),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Express a simulated trajectory as recorded history, e.g. to validate the
/// backtest against the model itself.
pub fn synthesize_history(trajectory: &Trajectory, genesis: NaiveDate) -> HistoricalData {
    let rows = trajectory
        .network
        .iter()
        .map(|r| HistoricalRow {
            date: genesis + Duration::days(r.day),
            rbp: Some(r.rbp),
            qap: Some(r.qap),
            onboarded_rb: r.onboarded_rb,
            renewed_rb: r.renewed_rb,
            fil_plus_share: if r.onboarded_rb > 0.0 { (r.onboarded_deal_rb / r.onboarded_rb).min(1.0) } else { 0.0 },
            circulating: r.circulating,
            minted: r.minted_cum,
            vested: Some(r.vested_cum),
            locked: Some(r.locked()),
            burnt: Some(r.burnt_cum),
        })
        .collect();
    HistoricalData { rows }
}

/// Paths of the files written for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub network_csv: PathBuf,
    pub agents_csv: PathBuf,
    pub summary_json: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            network_csv: dir.join("network.csv"),
            agents_csv: dir.join("agents.csv"),
            summary_json: dir.join("summary.json"),
        }
    }
}

fn round12(v: f64) -> f64 {
    fmt_sig12(v).parse().unwrap_or(v)
}

#[derive(Debug, Serialize)]
struct FinalSupply {
    day: Option<Day>,
    rbp_bytes: f64,
    qap_bytes: f64,
    minted_cum_fil: f64,
    vested_cum_fil: f64,
    locked_reward_fil: f64,
    locked_collateral_fil: f64,
    burnt_cum_fil: f64,
    circulating_fil: f64,
}

#[derive(Debug, Serialize)]
struct AgentSummary {
    agent_id: String,
    cum_reward_fil: f64,
    borrow_cost_cum_fil: f64,
    net_cum_reward_fil: f64,
    pledge_outstanding_fil: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    engine: &'static str,
    engine_version: &'static str,
    days: usize,
    final_supply: FinalSupply,
    agents: Vec<AgentSummary>,
    warnings: &'a [String],
    config: &'a SimulationConfig,
}

pub fn summary_json(trajectory: &Trajectory, config: &SimulationConfig) -> Result<String, DataError> {
    let last = trajectory.network.last();
    let pick = |f: fn(&NetworkRecord) -> f64| last.map_or(0.0, |r| round12(f(r)));
    let final_supply = FinalSupply {
        day: last.map(|r| r.day),
        rbp_bytes: pick(|r| r.rbp),
        qap_bytes: pick(|r| r.qap),
        minted_cum_fil: pick(|r| r.minted_cum),
        vested_cum_fil: pick(|r| r.vested_cum),
        locked_reward_fil: pick(|r| r.locked_reward),
        locked_collateral_fil: pick(|r| r.locked_collateral),
        burnt_cum_fil: pick(|r| r.burnt_cum),
        circulating_fil: pick(|r| r.circulating),
    };
    let final_day = last.map(|r| r.day);
    let agents = trajectory
        .agents
        .iter()
        .filter(|r| Some(r.day) == final_day)
        .map(|r| AgentSummary {
            agent_id: r.agent.to_string(),
            cum_reward_fil: round12(r.cum_reward),
            borrow_cost_cum_fil: round12(r.borrow_cost_cum),
            net_cum_reward_fil: round12(r.net_cum_reward),
            pledge_outstanding_fil: round12(r.pledge_outstanding),
        })
        .collect();
    let summary = Summary {
        engine: env!("CARGO_PKG_NAME"),
        engine_version: env!("CARGO_PKG_VERSION"),
        days: trajectory.len(),
        final_supply,
        agents,
        warnings: &trajectory.warnings,
        config,
    };
    Ok(serde_json::to_string_pretty(&summary)?)
}

/// Write `network.csv`, `agents.csv` and `summary.json` into `out_dir`.
pub fn write_trajectory(trajectory: &Trajectory, config: &SimulationConfig, out_dir: &Path) -> Result<OutputFiles, DataError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let files = OutputFiles::in_dir(out_dir);

    let path = &files.network_csv;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(NETWORK_COLUMNS).map_err(csv_err(path))?;
    for r in &trajectory.network {
        let mut row = vec![r.day.to_string()];
        row.extend(
            [
                r.rbp,
                r.qap,
                r.baseline,
                r.delta_minted,
                r.minted_cum,
                r.vested_cum,
                r.locked_reward,
                r.locked_collateral,
                r.burnt_cum,
                r.circulating,
            ]
            .map(fmt_sig12),
        );
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let path = &files.agents_csv;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(AGENT_COLUMNS).map_err(csv_err(path))?;
    for r in &trajectory.agents {
        let mut row = vec![r.day.to_string(), r.agent.to_string()];
        row.extend(
            [r.qap, r.daily_reward, r.cum_reward, r.pledge_outstanding, r.borrow_cost_cum, r.net_cum_reward]
                .map(fmt_sig12),
        );
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let json = summary_json(trajectory, config)?;
    fs::write(&files.summary_json, json + "\n").map_err(io_err(&files.summary_json))?;
    Ok(files)
}

/// A row of `network.csv` as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRow {
    pub day: Day,
    pub rbp: f64,
    pub qap: f64,
    pub baseline: f64,
    pub delta_minted: f64,
    pub minted_cum: f64,
    pub vested_cum: f64,
    pub locked_reward: f64,
    pub locked_collateral: f64,
    pub burnt_cum: f64,
    pub circulating: f64,
}

pub fn read_network_csv(path: &Path) -> Result<Vec<NetworkRow>, DataError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(NETWORK_COLUMNS) {
        let missing = NETWORK_COLUMNS
            .iter()
            .find(|c| !headers.iter().any(|h| h == **c))
            .map_or_else(|| "column order".to_string(), |c| c.to_string());
        return Err(DataError::MissingColumn(missing));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = i + 2;
        let mut v = [0.0f64; 10];
        for (k, slot) in v.iter_mut().enumerate() {
            let text = &rec[k + 1];
            *slot = text.parse().map_err(|_| DataError::BadNumber {
                line,
                column: NETWORK_COLUMNS[k + 1].to_string(),
                text: text.to_string(),
            })?;
        }
        let day = rec[0].parse().map_err(|_| DataError::BadNumber {
            line,
            column: "day".into(),
            text: rec[0].to_string(),
        })?;
        out.push(NetworkRow {
            day,
            rbp: v[0],
            qap: v[1],
            baseline: v[2],
            delta_minted: v[3],
            minted_cum: v[4],
            vested_cum: v[5],
            locked_reward: v[6],
            locked_collateral: v[7],
            burnt_cum: v[8],
            circulating: v[9],
        });
    }
    Ok(out)
}
