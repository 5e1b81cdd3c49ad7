//! Canned experiments and parameter sweeps.
//!
//! Fixture values (start day, seeded network, quotas, horizon) are choices of
//! this crate; every one of them can be overridden with `key=value` pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::config::{
    set_path, AgentConfig, ConfigError, HistoryPoint, InitialState, InitialTranche, RateSchedule, SimulationConfig,
    StrategyKind,
};
use crate::engine::{run, EngineError, Trajectory};
use crate::io::{write_trajectory, DataError};
use crate::power::{AgentId, PowerKind};
use crate::supply::{SupplyParams, VestingSchedule};
use crate::units::{fmt_sig12, Bytes, EIB};
use crate::Day;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}` (expected rate_sensitivity, rate_sensitivity_riskaverse or wealth_concentration)")]
    UnknownName(String),
    #[error("override `{0}`: expected key=value")]
    BadOverride(String),
    #[error("override `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{scenario}`: {source}")]
    Run { scenario: String, source: EngineError },
    #[error(transparent)]
    Data(#[from] DataError),
}

impl ExperimentError {
    pub fn is_model_breakdown(&self) -> bool {
        matches!(self, ExperimentError::Run { source, .. } if source.is_model_breakdown())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    RateSensitivity,
    RateSensitivityRiskAverse,
    WealthConcentration,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 3] = [
        ExperimentName::RateSensitivity,
        ExperimentName::RateSensitivityRiskAverse,
        ExperimentName::WealthConcentration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::RateSensitivity => "rate_sensitivity",
            ExperimentName::RateSensitivityRiskAverse => "rate_sensitivity_riskaverse",
            ExperimentName::WealthConcentration => "wealth_concentration",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ExperimentError::UnknownName(s.to_string()))
    }
}

pub const FIXTURE_START_DAY: Day = 1000;
pub const DEFAULT_HORIZON_DAYS: Day = 1500;
pub const DEFAULT_RATES: [f64; 3] = [0.10, 0.20, 0.30];
pub const DEFAULT_DISCOUNT_RATE: f64 = 0.10;
pub const WEALTH_HORIZON_DAYS: Day = 720;
pub const WARMUP_DAYS: Day = 30;
pub const SUBPOPULATION_SIZE: usize = 5;
pub const WEALTH_VECTORS: [(&str, [f64; 5]); 3] = [
    ("equal", [1.0, 1.0, 1.0, 1.0, 1.0]),
    ("one_dominant", [4.0, 1.0, 1.0, 1.0, 1.0]),
    ("graded", [5.0, 4.0, 3.0, 2.0, 1.0]),
];

/// Settings shared by all scenarios of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub horizon_days: Day,
    pub rates: Vec<f64>,
    /// Config-path overrides applied to every scenario.
    pub overrides: Vec<(String, String)>,
}

impl ExperimentOptions {
    pub fn defaults_for(name: ExperimentName) -> Self {
        let horizon_days = match name {
            ExperimentName::WealthConcentration => WEALTH_HORIZON_DAYS,
            _ => DEFAULT_HORIZON_DAYS,
        };
        Self { horizon_days, rates: DEFAULT_RATES.to_vec(), overrides: Vec::new() }
    }

    /// Parse `key=value` pairs. `horizon_days` and `rates` (comma list or
    /// TOML array) are experiment settings; anything else is a config path.
    pub fn with_sets<S: AsRef<str>>(mut self, sets: &[S]) -> Result<Self, ExperimentError> {
        for item in sets {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ExperimentError::BadOverride(item.to_string()))?;
            let bad = |message: String| ExperimentError::BadValue { key: key.to_string(), message };
            match key {
                "horizon_days" => {
                    self.horizon_days = value.parse().map_err(|e| bad(format!("{e}")))?;
                    if self.horizon_days < 0 {
                        return Err(bad("must be non-negative".into()));
                    }
                }
                "rates" => self.rates = parse_list(value).map_err(bad)?,
                _ => self.overrides.push((key.to_string(), value.to_string())),
            }
        }
        Ok(self)
    }
}

/// Parse `0.1,0.2` or `[0.1, 0.2]`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let values: Vec<f64> = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

/// A named configuration inside an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: SimulationConfig,
}

fn fixture_supply() -> SupplyParams {
    SupplyParams {
        vesting_schedules: vec![VestingSchedule {
            recipient_id: "early_allocations".into(),
            total_amount: 0.9e9,
            start_day: 0,
            duration_days: 2190,
        }],
        ..Default::default()
    }
}

/// Seeded network at `FIXTURE_START_DAY`: every owner holds `rb_each` raw
/// bytes of its kind, split into six tranches expiring 90 days apart, with
/// `pledge_per_qa` FIL of collateral per quality-adjusted byte.
fn fixture_state(owners: &[(String, PowerKind)], rb_each: f64, pledge_per_qa: f64) -> InitialState {
    let start = FIXTURE_START_DAY;
    let mut power = Vec::new();
    for (owner, kind) in owners {
        for k in 1..=6 {
            let rb = rb_each / 6.0;
            power.push(InitialTranche {
                owner: owner.clone(),
                rb: Bytes(rb),
                kind: *kind,
                expiry_day: start + 90 * k,
                pledge: rb * kind.multiplier() * pledge_per_qa,
            });
        }
    }
    let rbp: f64 = owners.len() as f64 * rb_each;
    let qap: f64 = owners.iter().map(|(_, k)| rb_each * k.multiplier()).sum();
    let history = (start - 90..start)
        .map(|day| HistoryPoint { day, rbp: Bytes(rbp), qap: Bytes(qap) })
        .collect();
    InitialState {
        capped_rbp_cumsum: Bytes(4000.0 * EIB),
        locked_reward: 12e6,
        burnt_termination: 30e6,
        power,
        history,
    }
}

fn base_config(horizon: Day, agents: Vec<AgentConfig>, initial_state: InitialState, rate: f64) -> SimulationConfig {
    SimulationConfig {
        start_day: FIXTURE_START_DAY,
        end_day: FIXTURE_START_DAY + horizon,
        mode: Default::default(),
        seed: 0,
        supply: fixture_supply(),
        forecast: Default::default(),
        external_rate: RateSchedule::constant(rate),
        initial_state,
        backtest: Default::default(),
        agents,
    }
}

pub fn rate_agent_id(fil_plus: bool, i: usize) -> String {
    format!("{}-{i}", if fil_plus { "filplus" } else { "cc" })
}

fn rate_population(cc_discount_multiplier: f64) -> (Vec<AgentConfig>, InitialState) {
    let mut agents = Vec::new();
    let mut owners = Vec::new();
    for fil_plus in [false, true] {
        for i in 0..SUBPOPULATION_SIZE {
            let id = rate_agent_id(fil_plus, i);
            let multiplier = if fil_plus { 1.0 } else { cc_discount_multiplier };
            agents.push(AgentConfig {
                id: id.clone(),
                strategy: StrategyKind::Npv,
                daily_onboard_rb: Bytes::pib(2.0),
                fil_plus_fraction: if fil_plus { 1.0 } else { 0.0 },
                renewal_fraction: 0.5,
                fofr_threshold: None,
                discount_rate: Some(DEFAULT_DISCOUNT_RATE * multiplier),
                candidate_durations: vec![180, 360, 540],
                capitalization_weight: 1.0,
                extra_cost_per_sector: 0.0,
            });
            owners.push((id, if fil_plus { PowerKind::FilPlus } else { PowerKind::Cc }));
        }
    }
    let state = fixture_state(&owners, 0.5 * EIB, 4.0e6 / EIB);
    (agents, state)
}

pub fn wealth_agent_id(i: usize) -> String {
    format!("sp-{}", i + 1)
}

fn wealth_population(weights: &[f64; 5]) -> (Vec<AgentConfig>, InitialState) {
    let agents: Vec<AgentConfig> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| AgentConfig {
            id: wealth_agent_id(i),
            strategy: StrategyKind::Dca,
            daily_onboard_rb: Bytes::pib(4.0),
            fil_plus_fraction: 0.0,
            renewal_fraction: 0.5,
            fofr_threshold: None,
            discount_rate: None,
            candidate_durations: vec![360],
            capitalization_weight: w,
            extra_cost_per_sector: 0.0,
        })
        .collect();
    let owners: Vec<(String, PowerKind)> = agents.iter().map(|a| (a.id.clone(), PowerKind::Cc)).collect();
    let state = fixture_state(&owners, 2.0 * EIB, 4.0e6 / EIB);
    (agents, state)
}

fn apply_overrides(config: SimulationConfig, overrides: &[(String, String)]) -> Result<SimulationConfig, ExperimentError> {
    if overrides.is_empty() {
        return Ok(config);
    }
    let mut doc = config.to_value();
    for (key, value) in overrides {
        set_path(&mut doc, key, value)?;
    }
    Ok(SimulationConfig::from_value(doc)?)
}

pub fn rate_scenario_name(rate: f64) -> String {
    format!("rate_{}", fmt_sig12(rate))
}

/// Scenario configurations of an experiment, in output order.
pub fn scenarios(name: ExperimentName, opts: &ExperimentOptions) -> Result<Vec<Scenario>, ExperimentError> {
    let mut out = Vec::new();
    match name {
        ExperimentName::RateSensitivity | ExperimentName::RateSensitivityRiskAverse => {
            let multiplier = if name == ExperimentName::RateSensitivityRiskAverse { 2.0 } else { 1.0 };
            for &rate in &opts.rates {
                let (agents, state) = rate_population(multiplier);
                out.push(Scenario {
                    name: rate_scenario_name(rate),
                    config: base_config(opts.horizon_days, agents, state, rate),
                });
            }
        }
        ExperimentName::WealthConcentration => {
            for (label, weights) in WEALTH_VECTORS {
                let (agents, state) = wealth_population(&weights);
                out.push(Scenario {
                    name: label.to_string(),
                    config: base_config(opts.horizon_days, agents, state, 0.0),
                });
            }
        }
    }
    out.into_iter()
        .map(|s| {
            let config = apply_overrides(s.config, &opts.overrides)?;
            config.validate()?;
            Ok(Scenario { name: s.name, config })
        })
        .collect()
}

/// Run independent configurations on separate threads. Results keep the
/// input order.
pub fn run_all(configs: &[SimulationConfig]) -> Vec<Result<Trajectory, EngineError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|panic| std::panic::resume_unwind(panic)))
            .collect()
    })
}

/// Cumulative net reward summed over agents whose id starts with `prefix`,
/// one value per day.
pub fn group_net_rewards(trajectory: &Trajectory, prefix: &str) -> Vec<(Day, f64)> {
    let mut by_day: BTreeMap<Day, f64> = BTreeMap::new();
    for r in &trajectory.agents {
        if r.agent.as_str().starts_with(prefix) {
            *by_day.entry(r.day).or_default() += r.net_cum_reward;
        }
    }
    by_day.into_iter().collect()
}

/// Qualitative checks of the rate experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rates: Vec<f64>,
    pub warmup_days: Day,
    /// Per rate: FIL+ net ≥ CC net on every day after warm-up.
    pub filplus_ge_cc: Vec<bool>,
    pub filplus_final_net: Vec<f64>,
    pub cc_final_net: Vec<f64>,
    /// Final net rewards do not increase with the rate, per subpopulation.
    pub filplus_nonincreasing_in_rate: bool,
    pub cc_nonincreasing_in_rate: bool,
    /// Some subpopulation's daily net change switches sign at least twice.
    pub oscillation_detected: Vec<bool>,
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

fn sign_switches(series: &[(Day, f64)]) -> usize {
    let deltas: Vec<f64> = series.windows(2).map(|w| w[1].1 - w[0].1).filter(|d| *d != 0.0).collect();
    deltas.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

pub fn rate_report(rates: &[f64], trajectories: &[Trajectory]) -> RateReport {
    let mut report = RateReport {
        rates: rates.to_vec(),
        warmup_days: WARMUP_DAYS,
        filplus_ge_cc: Vec::new(),
        filplus_final_net: Vec::new(),
        cc_final_net: Vec::new(),
        filplus_nonincreasing_in_rate: false,
        cc_nonincreasing_in_rate: false,
        oscillation_detected: Vec::new(),
    };
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]));
    for t in trajectories {
        let fp = group_net_rewards(t, "filplus-");
        let cc = group_net_rewards(t, "cc-");
        let first = fp.first().map_or(0, |p| p.0);
        report.filplus_ge_cc.push(
            fp.iter()
                .zip(&cc)
                .filter(|(p, _)| p.0 >= first + WARMUP_DAYS)
                .all(|(p, c)| p.1 >= c.1),
        );
        report.filplus_final_net.push(fp.last().map_or(0.0, |p| p.1));
        report.cc_final_net.push(cc.last().map_or(0.0, |p| p.1));
        report.oscillation_detected.push(sign_switches(&fp) >= 2 || sign_switches(&cc) >= 2);
    }
    let sorted = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
    report.filplus_nonincreasing_in_rate = non_increasing(&sorted(&report.filplus_final_net));
    report.cc_nonincreasing_in_rate = non_increasing(&sorted(&report.cc_final_net));
    report
}

/// Qualitative checks of the wealth experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthReport {
    pub scenarios: Vec<String>,
    pub warmup_days: Day,
    /// Per scenario: every agent's reward relative to the best-capitalized
    /// agent is non-increasing after warm-up.
    pub relative_rewards_nonincreasing: Vec<bool>,
    /// Per scenario: largest relative deviation of network QAP from the
    /// first scenario, over all days.
    pub max_power_deviation: Vec<f64>,
}

/// One row per scenario, day and agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeRewardRow {
    pub scenario: String,
    pub day: Day,
    pub agent: AgentId,
    pub cum_reward: f64,
    /// Cumulative reward over the same agent's in the first scenario.
    pub relative_to_baseline: f64,
    /// Cumulative reward over the best-capitalized agent's.
    pub relative_to_max: f64,
}

fn cum_rewards_by_day(t: &Trajectory) -> BTreeMap<(Day, AgentId), f64> {
    t.agents.iter().map(|r| ((r.day, r.agent.clone()), r.cum_reward)).collect()
}

/// Relative reward rows and the wealth checks. `weights[i]` belongs to
/// `trajectories[i]`; the first scenario is the baseline.
pub fn wealth_analysis(
    names: &[String],
    weights: &[BTreeMap<AgentId, f64>],
    trajectories: &[Trajectory],
) -> (Vec<RelativeRewardRow>, WealthReport) {
    let mut rows = Vec::new();
    let mut report = WealthReport {
        scenarios: names.to_vec(),
        warmup_days: WARMUP_DAYS,
        relative_rewards_nonincreasing: Vec::new(),
        max_power_deviation: Vec::new(),
    };
    let Some(base) = trajectories.first() else {
        return (rows, report);
    };
    let base_cum = cum_rewards_by_day(base);
    for ((name, w), t) in names.iter().zip(weights).zip(trajectories) {
        let cum = cum_rewards_by_day(t);
        let top = w
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(id, _)| id.clone());
        let first = t.network.first().map_or(0, |r| r.day);
        let mut previous: BTreeMap<AgentId, f64> = BTreeMap::new();
        let mut monotone = true;
        for ((day, agent), &value) in &cum {
            let base_value = base_cum.get(&(*day, agent.clone())).copied().unwrap_or(0.0);
            let top_value = top.as_ref().and_then(|id| cum.get(&(*day, id.clone()))).copied().unwrap_or(0.0);
            let rel_max = if top_value > 0.0 { value / top_value } else { 0.0 };
            if *day >= first + WARMUP_DAYS {
                if let Some(&prev) = previous.get(agent) {
                    if rel_max > prev * (1.0 + 1e-12) {
                        monotone = false;
                    }
                }
                previous.insert(agent.clone(), rel_max);
            }
            rows.push(RelativeRewardRow {
                scenario: name.clone(),
                day: *day,
                agent: agent.clone(),
                cum_reward: value,
                relative_to_baseline: if base_value > 0.0 { value / base_value } else { 0.0 },
                relative_to_max: rel_max,
            });
        }
        report.relative_rewards_nonincreasing.push(monotone);
        let deviation = t
            .network
            .iter()
            .zip(&base.network)
            .map(|(a, b)| (a.qap - b.qap).abs() / b.qap.abs().max(1.0))
            .fold(0.0, f64::max);
        report.max_power_deviation.push(deviation);
    }
    rows.sort_by(|a, b| (&a.scenario, a.day, &a.agent).cmp(&(&b.scenario, b.day, &b.agent)));
    (rows, report)
}

/// Files and checks produced by one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub scenario_dirs: Vec<PathBuf>,
    pub report_path: PathBuf,
    pub rate: Option<RateReport>,
    pub wealth: Option<WealthReport>,
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), DataError> {
    let csv_err = |source| DataError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DataError> {
    let text = serde_json::to_string_pretty(value).map_err(DataError::Json)?;
    std::fs::write(path, text + "\n").map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

/// Run every scenario, write one directory per scenario plus the
/// experiment's comparison files into `out_dir`.
pub fn run_experiment(name: ExperimentName, opts: &ExperimentOptions, out_dir: &Path) -> Result<ExperimentOutput, ExperimentError> {
    let scenarios = scenarios(name, opts)?;
    let configs: Vec<SimulationConfig> = scenarios.iter().map(|s| s.config.clone()).collect();
    let results = run_all(&configs);
    std::fs::create_dir_all(out_dir).map_err(|source| DataError::Io { path: out_dir.to_path_buf(), source })?;
    let mut trajectories = Vec::new();
    let mut dirs = Vec::new();
    let mut first_error = None;
    for (s, result) in scenarios.iter().zip(results) {
        match result {
            Ok(t) => {
                let dir = out_dir.join(&s.name);
                write_trajectory(&t, &s.config, &dir)?;
                dirs.push(dir);
                trajectories.push(t);
            }
            Err(source) => {
                first_error.get_or_insert(ExperimentError::Run { scenario: s.name.clone(), source });
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    let report_path = out_dir.join("report.json");
    let mut output = ExperimentOutput { scenario_dirs: dirs, report_path: report_path.clone(), rate: None, wealth: None };
    match name {
        ExperimentName::RateSensitivity | ExperimentName::RateSensitivityRiskAverse => {
            let mut rows = Vec::new();
            for (rate, t) in opts.rates.iter().zip(&trajectories) {
                let fp = group_net_rewards(t, "filplus-");
                let cc = group_net_rewards(t, "cc-");
                for (p, c) in fp.iter().zip(&cc) {
                    rows.push(vec![fmt_sig12(*rate), p.0.to_string(), fmt_sig12(p.1), fmt_sig12(c.1)]);
                }
            }
            write_csv(
                &out_dir.join("subpopulations.csv"),
                &["external_rate", "day", "filplus_net_cum_reward_fil", "cc_net_cum_reward_fil"],
                rows,
            )?;
            let report = rate_report(&opts.rates, &trajectories);
            write_json(&report_path, &report)?;
            output.rate = Some(report);
        }
        ExperimentName::WealthConcentration => {
            let names: Vec<String> = scenarios.iter().map(|s| s.name.clone()).collect();
            let weights: Vec<BTreeMap<AgentId, f64>> = scenarios
                .iter()
                .map(|s| {
                    s.config
                        .agents
                        .iter()
                        .map(|a| (AgentId::new(a.id.clone()), a.capitalization_weight))
                        .collect()
                })
                .collect();
            let (rows, report) = wealth_analysis(&names, &weights, &trajectories);
            write_csv(
                &out_dir.join("relative_rewards.csv"),
                &["scenario", "day", "agent_id", "cum_reward_fil", "relative_to_baseline", "relative_to_max"],
                rows.iter().map(|r| {
                    vec![
                        r.scenario.clone(),
                        r.day.to_string(),
                        r.agent.to_string(),
                        fmt_sig12(r.cum_reward),
                        fmt_sig12(r.relative_to_baseline),
                        fmt_sig12(r.relative_to_max),
                    ]
                }),
            )?;
            write_json(&report_path, &report)?;
            output.wealth = Some(report);
        }
    }
    Ok(output)
}

/// One configuration per sweep value, `param` set to that value.
pub fn sweep_configs(base: &SimulationConfig, param: &str, values: &[String]) -> Result<Vec<SimulationConfig>, ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::BadValue { key: param.to_string(), message: "no sweep values".into() });
    }
    let mut seen = std::collections::BTreeSet::new();
    values
        .iter()
        .map(|v| {
            if !seen.insert(v.as_str()) {
                return Err(ExperimentError::BadValue { key: param.to_string(), message: format!("duplicate value `{v}`") });
            }
            let mut doc = base.to_value();
            set_path(&mut doc, param, v)?;
            Ok(SimulationConfig::from_value(doc)?)
        })
        .collect()
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "value",
    "agent_id",
    "cum_reward_fil",
    "borrow_cost_cum_fil",
    "net_cum_reward_fil",
    "onboarded_rb_bytes",
    "renewed_rb_bytes",
    "final_qap_bytes",
];

/// Per-agent final values of one sweep run.
pub fn sweep_rows(value: &str, trajectory: &Trajectory) -> Vec<Vec<String>> {
    let Some(last_day) = trajectory.network.last().map(|r| r.day) else {
        return Vec::new();
    };
    trajectory
        .agents
        .iter()
        .filter(|r| r.day == last_day)
        .map(|r| {
            vec![
                value.to_string(),
                r.agent.to_string(),
                fmt_sig12(r.cum_reward),
                fmt_sig12(r.borrow_cost_cum),
                fmt_sig12(r.net_cum_reward),
                fmt_sig12(r.onboarded_rb_cum),
                fmt_sig12(r.renewed_rb_cum),
                fmt_sig12(r.qap),
            ]
        })
        .collect()
}

pub fn write_sweep_comparison(path: &Path, rows: Vec<Vec<String>>) -> Result<(), DataError> {
    write_csv(path, &SWEEP_COLUMNS, rows)
}

/// Directory name of one sweep value.
pub fn sweep_dir_name(index: usize, value: &str) -> String {
    let clean: String = value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    format!("{index:02}_{clean}")
}
