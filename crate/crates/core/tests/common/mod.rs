#![allow(dead_code)]

use fil_abm::config::{AgentConfig, RateSchedule, SimulationConfig, StrategyKind};
use fil_abm::supply::{SupplyParams, VestingSchedule};
use fil_abm::units::Bytes;
use fil_abm::Day;

pub fn vesting_supply() -> SupplyParams {
    SupplyParams {
        vesting_schedules: vec![VestingSchedule {
            recipient_id: "early".into(),
            total_amount: 0.9e9,
            start_day: 0,
            duration_days: 2190,
        }],
        ..Default::default()
    }
}

pub fn agent(id: &str, strategy: StrategyKind, quota_pib: f64) -> AgentConfig {
    AgentConfig {
        id: id.into(),
        strategy,
        daily_onboard_rb: Bytes::pib(quota_pib),
        fil_plus_fraction: 0.0,
        renewal_fraction: 0.0,
        fofr_threshold: matches!(strategy, StrategyKind::Fofr).then_some(0.1),
        discount_rate: matches!(strategy, StrategyKind::Npv).then_some(0.1),
        candidate_durations: vec![180, 360, 540],
        capitalization_weight: 1.0,
        extra_cost_per_sector: 0.0,
    }
}

pub fn config(start_day: Day, days: Day, rate: f64, agents: Vec<AgentConfig>) -> SimulationConfig {
    SimulationConfig {
        start_day,
        end_day: start_day + days,
        mode: Default::default(),
        seed: 0,
        supply: vesting_supply(),
        forecast: Default::default(),
        external_rate: RateSchedule::constant(rate),
        initial_state: Default::default(),
        backtest: Default::default(),
        agents,
    }
}

/// DCA, FoFR and NPV agents with CC and FIL+ power, renewals and gas burn.
pub fn mixed_config(days: Day) -> SimulationConfig {
    let mut dca = agent("dca", StrategyKind::Dca, 3.0);
    dca.fil_plus_fraction = 0.3;
    dca.renewal_fraction = 0.5;
    dca.candidate_durations = vec![360];
    let mut fofr = agent("fofr", StrategyKind::Fofr, 2.0);
    fofr.fil_plus_fraction = 1.0;
    fofr.renewal_fraction = 0.7;
    let mut npv = agent("npv", StrategyKind::Npv, 2.0);
    npv.renewal_fraction = 0.5;
    npv.capitalization_weight = 2.0;
    let mut c = config(200, days, 0.15, vec![dca, fofr, npv]);
    c.supply.gas_burn_rate_beta = 1000.0;
    c
}
