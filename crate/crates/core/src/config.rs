//! Run configuration: a TOML document with a fixed schema.
//!
//! Unknown keys are rejected at every level. Byte quantities accept either a
//! number of bytes or a string with a binary suffix (`"2 PiB"`).
//!
//! ```toml
//! start_day = 1000
//! end_day = 1365
//!
//! [external_rate]
//! rate = 0.2
//!
//! [[agents]]
//! id = "sp-1"
//! strategy = "npv"
//! daily_onboard_rb = "1 PiB"
//! discount_rate = 0.25
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentSpec, Strategy};
use crate::forecast::ForecastSettings;
use crate::power::{AgentId, PowerKind};
use crate::supply::SupplyParams;
use crate::units::Bytes;
use crate::Day;

pub const DEFAULT_CANDIDATE_DURATIONS: [u32; 3] = [180, 360, 540];

/// A schema violation, located by its field path.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Simulate,
    Backtest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Dca,
    Fofr,
    Npv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub id: String,
    pub strategy: StrategyKind,
    pub daily_onboard_rb: Bytes,
    #[serde(default)]
    pub fil_plus_fraction: f64,
    #[serde(default)]
    pub renewal_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fofr_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_rate: Option<f64>,
    #[serde(default = "default_durations")]
    pub candidate_durations: Vec<u32>,
    #[serde(default = "one")]
    pub capitalization_weight: f64,
    #[serde(default)]
    pub extra_cost_per_sector: f64,
}

fn default_durations() -> Vec<u32> {
    DEFAULT_CANDIDATE_DURATIONS.to_vec()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSegment {
    pub start_day: Day,
    pub rate: f64,
}

/// Piecewise-constant annual borrowing rate. Each segment applies from its
/// `start_day` (inclusive) until the next segment starts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateSchedule {
    /// Constant rate for every day; mutually exclusive with `segments`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<RateSegment>,
    /// Exclusive end of the schedule's span.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_day: Option<Day>,
}

impl RateSchedule {
    pub fn constant(rate: f64) -> Self {
        Self { rate: Some(rate), ..Default::default() }
    }

    /// Rate in force on `day`, or `None` outside the schedule's span.
    pub fn rate_at(&self, day: Day) -> Option<f64> {
        if self.end_day.is_some_and(|end| day >= end) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.rate.unwrap_or(0.0));
        }
        self.segments
            .iter()
            .take_while(|s| s.start_day <= day)
            .last()
            .map(|s| s.rate)
    }

    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if self.rate.is_some() && !self.segments.is_empty() {
            return Err(ConfigError::new(path, "set either `rate` or `segments`, not both"));
        }
        if let Some(r) = self.rate {
            check_rate(&format!("{path}.rate"), r)?;
        }
        for (i, s) in self.segments.iter().enumerate() {
            check_rate(&format!("{path}.segments[{i}].rate"), s.rate)?;
            if i > 0 && s.start_day <= self.segments[i - 1].start_day {
                return Err(ConfigError::new(
                    format!("{path}.segments[{i}].start_day"),
                    "segments must have strictly increasing start days",
                ));
            }
        }
        Ok(())
    }
}

fn check_rate(path: &str, r: f64) -> Result<(), ConfigError> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("rate must be non-negative, got {r}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialTranche {
    pub owner: String,
    pub rb: Bytes,
    pub kind: PowerKind,
    pub expiry_day: Day,
    /// Collateral locked against this power until it expires.
    #[serde(default)]
    pub pledge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryPoint {
    pub day: Day,
    pub rbp: Bytes,
    pub qap: Bytes,
}

/// Network state before `start_day`. All empty means genesis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    /// Baseline-capped raw-byte power summed over all prior days (byte-days).
    pub capped_rbp_cumsum: Bytes,
    pub locked_reward: f64,
    pub burnt_termination: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub power: Vec<InitialTranche>,
    /// Realized power before `start_day`, used to seed the forecaster.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HistoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSettings {
    /// Calendar date of day index 0.
    pub genesis_date: String,
    /// Commitment length of replayed onboardings and renewals.
    pub sector_duration: u32,
    /// Largest acceptable relative error before the backtest is flagged.
    pub max_rel_error: f64,
}

impl Default for BacktestSettings {
    fn default() -> Self {
        Self {
            genesis_date: "2020-10-15".into(),
            sector_duration: 360,
            max_rel_error: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub start_day: Day,
    pub end_day: Day,
    #[serde(default)]
    pub mode: Mode,
    /// Reserved for stochastic extensions; the shipped model ignores it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub supply: SupplyParams,
    #[serde(default)]
    pub forecast: ForecastSettings,
    #[serde(default)]
    pub external_rate: RateSchedule,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub backtest: BacktestSettings,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let value: toml::Value = toml::from_str(text).map_err(|e| ConfigError::new("<document>", e.message()))?;
        Self::from_value(value)
    }

    /// Deserialize and validate a parsed TOML document.
    pub fn from_value(value: toml::Value) -> Result<Self, ConfigError> {
        let config: SimulationConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::new("<document>", e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("config is always representable as TOML")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.start_day < 0 {
            return Err(ConfigError::new("start_day", "must be non-negative"));
        }
        if self.end_day < self.start_day {
            return Err(ConfigError::new("end_day", "must not precede start_day"));
        }
        self.supply
            .validate()
            .map_err(|e| ConfigError::new("supply", e.to_string()))?;
        if self.forecast.window_days < 2 {
            return Err(ConfigError::new("forecast.window_days", "must be at least 2"));
        }
        if !(self.forecast.floor_bytes.0 > 0.0) {
            return Err(ConfigError::new("forecast.floor_bytes", "must be positive"));
        }
        if !(self.forecast.sector_size.0 > 0.0) {
            return Err(ConfigError::new("forecast.sector_size", "must be positive"));
        }
        self.external_rate.validate("external_rate")?;
        if self.start_day < self.end_day && self.external_rate.rate_at(self.start_day).is_none() {
            return Err(ConfigError::new("external_rate", "schedule does not cover start_day"));
        }
        if self.backtest.sector_duration < 1 {
            return Err(ConfigError::new("backtest.sector_duration", "must be at least 1"));
        }
        if chrono::NaiveDate::parse_from_str(&self.backtest.genesis_date, "%Y-%m-%d").is_err() {
            return Err(ConfigError::new("backtest.genesis_date", "expected YYYY-MM-DD"));
        }
        let specs = self.agent_specs()?;
        let ids: BTreeSet<&AgentId> = specs.iter().map(|s| &s.id).collect();
        let init = &self.initial_state;
        for (name, v) in [("locked_reward", init.locked_reward), ("burnt_termination", init.burnt_termination)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::new(format!("initial_state.{name}"), "must be non-negative"));
            }
        }
        for (i, t) in init.power.iter().enumerate() {
            let path = format!("initial_state.power[{i}]");
            if !ids.contains(&AgentId::new(t.owner.clone())) {
                return Err(ConfigError::new(format!("{path}.owner"), format!("unknown agent `{}`", t.owner)));
            }
            if t.expiry_day < self.start_day {
                return Err(ConfigError::new(format!("{path}.expiry_day"), "must not precede start_day"));
            }
            if !(t.pledge.is_finite() && t.pledge >= 0.0) {
                return Err(ConfigError::new(format!("{path}.pledge"), "must be non-negative"));
            }
        }
        for (i, h) in init.history.iter().enumerate() {
            if h.day >= self.start_day {
                return Err(ConfigError::new(format!("initial_state.history[{i}].day"), "must precede start_day"));
            }
            if i > 0 && h.day <= init.history[i - 1].day {
                return Err(ConfigError::new(
                    format!("initial_state.history[{i}].day"),
                    "days must be strictly increasing",
                ));
            }
        }
        Ok(())
    }

    /// Agent specifications sorted by id.
    pub fn agent_specs(&self) -> Result<Vec<AgentSpec>, ConfigError> {
        let mut seen = BTreeSet::new();
        let mut specs = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let path = |field: &str| format!("agents[{i}].{field}");
            if a.id.is_empty() {
                return Err(ConfigError::new(path("id"), "must not be empty"));
            }
            if !seen.insert(a.id.clone()) {
                return Err(ConfigError::new(path("id"), format!("duplicate agent id `{}`", a.id)));
            }
            for (field, v) in [("fil_plus_fraction", a.fil_plus_fraction), ("renewal_fraction", a.renewal_fraction)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(ConfigError::new(path(field), format!("must be in [0, 1], got {v}")));
                }
            }
            if !(a.capitalization_weight.is_finite() && a.capitalization_weight > 0.0) {
                return Err(ConfigError::new(path("capitalization_weight"), "must be positive"));
            }
            if !(a.extra_cost_per_sector.is_finite() && a.extra_cost_per_sector >= 0.0) {
                return Err(ConfigError::new(path("extra_cost_per_sector"), "must be non-negative"));
            }
            if a.candidate_durations.is_empty() {
                return Err(ConfigError::new(path("candidate_durations"), "must not be empty"));
            }
            if a.candidate_durations.contains(&0) {
                return Err(ConfigError::new(path("candidate_durations"), "durations must be at least 1 day"));
            }
            let strategy = match a.strategy {
                StrategyKind::Dca => Strategy::Dca,
                StrategyKind::Fofr => {
                    let threshold = a
                        .fofr_threshold
                        .ok_or_else(|| ConfigError::new(path("fofr_threshold"), "required for strategy `fofr`"))?;
                    if !(threshold.is_finite() && threshold >= 0.0) {
                        return Err(ConfigError::new(path("fofr_threshold"), "must be non-negative"));
                    }
                    Strategy::Fofr { threshold }
                }
                StrategyKind::Npv => {
                    let discount_rate = a
                        .discount_rate
                        .ok_or_else(|| ConfigError::new(path("discount_rate"), "required for strategy `npv`"))?;
                    check_rate(&path("discount_rate"), discount_rate)?;
                    Strategy::Npv { discount_rate }
                }
            };
            specs.push(AgentSpec {
                id: AgentId::new(a.id.clone()),
                strategy,
                daily_onboard_rb: a.daily_onboard_rb.0,
                fil_plus_fraction: a.fil_plus_fraction,
                renewal_fraction: a.renewal_fraction,
                candidate_durations: a.candidate_durations.clone(),
                capitalization_weight: a.capitalization_weight,
                extra_cost_per_sector: a.extra_cost_per_sector,
            });
        }
        specs.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(specs)
    }
}

/// Set `key=value` on a parsed config document. `key` is a dotted path;
/// `agents.<field>` sets the field on every agent and `agents[i].<field>`
/// on one. `value` is parsed as a TOML value, falling back to a string.
pub fn set_path(doc: &mut toml::Value, key: &str, value: &str) -> Result<(), ConfigError> {
    let parsed = parse_scalar(value);
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::new(key, "empty path segment"));
    }
    set_segments(doc, &segments, &parsed, key)
}

fn parse_scalar(value: &str) -> toml::Value {
    let wrapped = format!("v = {value}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

fn set_segments(node: &mut toml::Value, segments: &[&str], value: &toml::Value, full: &str) -> Result<(), ConfigError> {
    let (head, rest) = segments.split_first().expect("non-empty path");
    let (name, index) = match head.find('[') {
        Some(open) if head.ends_with(']') => {
            let idx: usize = head[open + 1..head.len() - 1]
                .parse()
                .map_err(|_| ConfigError::new(full, format!("bad index in `{head}`")))?;
            (&head[..open], Some(idx))
        }
        _ => (*head, None),
    };
    let table = node
        .as_table_mut()
        .ok_or_else(|| ConfigError::new(full, format!("`{name}` is not inside a table")))?;
    if rest.is_empty() {
        if index.is_some() {
            return Err(ConfigError::new(full, "cannot assign to an array element directly"));
        }
        table.insert(name.to_string(), value.clone());
        return Ok(());
    }
    let child = table
        .entry(name.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match (child, index) {
        (toml::Value::Array(items), Some(i)) => {
            let len = items.len();
            let item = items
                .get_mut(i)
                .ok_or_else(|| ConfigError::new(full, format!("index {i} out of range (len {len})")))?;
            set_segments(item, rest, value, full)
        }
        (toml::Value::Array(items), None) => {
            if items.is_empty() {
                return Err(ConfigError::new(full, format!("`{name}` is empty")));
            }
            items.iter_mut().try_for_each(|item| set_segments(item, rest, value, full))
        }
        (child @ toml::Value::Table(_), None) => set_segments(child, rest, value, full),
        _ => Err(ConfigError::new(full, format!("`{name}` cannot be indexed that way"))),
    }
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<SimulationConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
    SimulationConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::PIB;

    const MINIMAL: &str = r#"
        start_day = 0
        end_day = 30

        [[agents]]
        id = "dca"
        strategy = "dca"
        daily_onboard_rb = "1 PiB"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = SimulationConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.supply, SupplyParams::default());
        assert_eq!(c.forecast, ForecastSettings::default());
        assert_eq!(c.external_rate.rate_at(10), Some(0.0));
        let specs = c.agent_specs().unwrap();
        assert_eq!(specs[0].daily_onboard_rb, PIB);
        assert_eq!(specs[0].candidate_durations, vec![180, 360, 540]);
        assert_eq!(specs[0].capitalization_weight, 1.0);
    }

    #[test]
    fn fofr_requires_threshold() {
        let text = MINIMAL.replace("strategy = \"dca\"", "strategy = \"fofr\"");
        let err = SimulationConfig::from_toml_str(&text).unwrap_err();
        assert_eq!(err.path, "agents[0].fofr_threshold");
        let text = MINIMAL.replace("strategy = \"dca\"", "strategy = \"npv\"");
        assert_eq!(SimulationConfig::from_toml_str(&text).unwrap_err().path, "agents[0].discount_rate");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[supply]\nlambdaa = 1.0\n");
        let err = SimulationConfig::from_toml_str(&text).unwrap_err();
        assert!(err.message.contains("lambdaa"), "{err}");
        let text = MINIMAL.replace("daily_onboard_rb", "daily_onbord_rb");
        assert!(SimulationConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn capitalization_vector_parses() {
        let mut text = String::from("start_day = 0\nend_day = 10\n");
        for (i, w) in [4, 1, 1, 1, 1].iter().enumerate() {
            text.push_str(&format!(
                "[[agents]]\nid = \"a{i}\"\nstrategy = \"dca\"\ndaily_onboard_rb = \"1 PiB\"\ncapitalization_weight = {w}\n"
            ));
        }
        let c = SimulationConfig::from_toml_str(&text).unwrap();
        let shares = crate::agents::capitalization_scale(&c.agent_specs().unwrap()).unwrap();
        let v: Vec<f64> = shares.into_values().collect();
        assert_eq!(v, vec![0.5, 0.125, 0.125, 0.125, 0.125]);
    }

    #[test]
    fn rate_schedule_segments() {
        let s = RateSchedule {
            rate: None,
            segments: vec![RateSegment { start_day: 0, rate: 0.1 }, RateSegment { start_day: 100, rate: 0.3 }],
            end_day: Some(200),
        };
        assert_eq!(s.rate_at(99), Some(0.1));
        assert_eq!(s.rate_at(100), Some(0.3));
        assert_eq!(s.rate_at(200), None);
        let late = RateSchedule { segments: vec![RateSegment { start_day: 5, rate: 0.1 }], ..Default::default() };
        assert_eq!(late.rate_at(4), None);
        assert_eq!(RateSchedule::constant(0.3).rate_at(12345), Some(0.3));
    }

    #[test]
    fn set_path_variants() {
        let mut doc: toml::Value = toml::from_str(MINIMAL).unwrap();
        set_path(&mut doc, "external_rate.rate", "0.3").unwrap();
        set_path(&mut doc, "agents.renewal_fraction", "0.5").unwrap();
        set_path(&mut doc, "agents[0].daily_onboard_rb", "2 PiB").unwrap();
        set_path(&mut doc, "end_day", "20").unwrap();
        let c = SimulationConfig::from_value(doc.clone()).unwrap();
        assert_eq!(c.external_rate.rate_at(0), Some(0.3));
        assert_eq!(c.agents[0].renewal_fraction, 0.5);
        assert_eq!(c.agents[0].daily_onboard_rb.0, 2.0 * PIB);
        assert_eq!(c.end_day, 20);
        assert!(set_path(&mut doc, "agents[3].renewal_fraction", "0.5").is_err());
        set_path(&mut doc, "supply.not_a_field", "1").unwrap();
        assert!(SimulationConfig::from_value(doc).is_err());
    }

    #[test]
    fn roundtrips_through_toml() {
        let c = SimulationConfig::from_toml_str(MINIMAL).unwrap();
        let again = SimulationConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
    }
}
