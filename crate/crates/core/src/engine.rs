//! The closed simulation loop.
//!
//! Every day runs in a fixed order:
//!
//! 1. due reward and collateral tranches are released and expiring power is
//!    removed from the ledger;
//! 2. the forecast is refreshed from the realized history up to yesterday;
//! 3. each agent decides from that forecast, yesterday's pledge basis and
//!    its own expiring power;
//! 4. decisions are applied in agent-id order (terminations, onboardings,
//!    renewals);
//! 5. the day's issuance is minted, collateral is locked against the new
//!    power, the vesting share of rewards is locked, and vesting and burns
//!    are updated;
//! 6. the circulating supply is recomputed;
//! 7. the day's issuance is paid out in proportion to QAP and borrowing
//!    costs accrue on outstanding pledge.
//!
//! The agent population is fixed for the whole run.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::agents::{
    dca_decide, fofr_decide, npv_decide, throughput_multipliers, AgentAccount, AgentError, AgentSpec, PledgeBasis,
    PowerDecision, Strategy,
};
use crate::config::{ConfigError, RateSchedule, SimulationConfig};
use crate::forecast::{ForecastError, Forecaster, LinearExtrapolation, PowerForecast};
use crate::power::{AgentId, NetworkPower, PowerError, PowerTranche};
use crate::supply::{SupplyError, SupplySeed, SupplyState};
use crate::Day;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("day {day}: supply model breakdown: {source}")]
    Supply { day: Day, source: SupplyError },
    #[error("day {day}: power ledger: {source}")]
    Power { day: Day, source: PowerError },
    #[error("day {day}: agent {agent}: {source}")]
    Agent { day: Day, agent: AgentId, source: AgentError },
    #[error("day {day}: forecast: {source}")]
    Forecast { day: Day, source: ForecastError },
    #[error("day {day} is outside the external rate schedule")]
    RateOutOfSpan { day: Day },
    #[error("day {day}: negative pool: {pools}")]
    NegativePool { day: Day, pools: String },
    #[error("simulation already finished at day {0}")]
    Finished(Day),
}

impl EngineError {
    /// Whether the error comes from the model itself rather than its inputs.
    pub fn is_model_breakdown(&self) -> bool {
        !matches!(self, EngineError::Config(_))
    }
}

/// Annual borrowing rate on `day`.
pub fn external_rate(schedule: &RateSchedule, day: Day) -> Result<f64, EngineError> {
    schedule.rate_at(day).ok_or(EngineError::RateOutOfSpan { day })
}

/// Split `delta_minted` across owners in proportion to their QAP. Shares are
/// normalized by the sum of `per_agent_qap`, which callers keep equal to the
/// network total. Nothing is paid out when the network has no power.
pub fn distribute_rewards(
    delta_minted: f64,
    per_agent_qap: &BTreeMap<AgentId, f64>,
    qap_total: f64,
) -> BTreeMap<AgentId, f64> {
    let owned: f64 = per_agent_qap.values().sum();
    if qap_total <= 0.0 || owned <= 0.0 {
        return per_agent_qap.keys().map(|a| (a.clone(), 0.0)).collect();
    }
    per_agent_qap
        .iter()
        .map(|(a, q)| (a.clone(), delta_minted * q / owned))
        .collect()
}

/// Per-day network series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRecord {
    pub day: Day,
    pub rbp: f64,
    pub qap: f64,
    pub rbp_cc: f64,
    pub rbp_deal: f64,
    pub baseline: f64,
    pub capped_rbp_cumsum: f64,
    pub delta_minted: f64,
    pub minted_cum: f64,
    pub vested_cum: f64,
    pub locked_reward: f64,
    pub locked_collateral: f64,
    pub burnt_termination: f64,
    pub burnt_gas: f64,
    pub burnt_cum: f64,
    pub circulating: f64,
    pub onboarded_rb: f64,
    pub onboarded_deal_rb: f64,
    pub renewed_rb: f64,
    pub external_rate: f64,
    /// Circulating supply used to price today's consensus pledge.
    pub pledge_circulating: f64,
    /// Pledge of a quality-1 sector as seen by agents when deciding.
    pub decision_pledge_per_sector: f64,
    /// Pledge of a quality-1 sector at today's realized values.
    pub realized_pledge_per_sector: f64,
}

impl NetworkRecord {
    pub fn locked(&self) -> f64 {
        self.locked_reward + self.locked_collateral
    }

    /// `|S - (M + V - L - B)|` relative to `max(1, S)`.
    pub fn identity_residual(&self) -> f64 {
        let rhs = self.minted_cum + self.vested_cum - self.locked() - self.burnt_cum;
        (self.circulating - rhs).abs() / self.circulating.abs().max(1.0)
    }
}

/// Per-day, per-agent series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRecord {
    pub day: Day,
    pub agent: AgentId,
    pub qap: f64,
    pub daily_reward: f64,
    pub cum_reward: f64,
    pub pledge_outstanding: f64,
    pub borrow_cost_cum: f64,
    pub net_cum_reward: f64,
    /// Raw bytes this agent onboarded and renewed so far in the run.
    pub onboarded_rb_cum: f64,
    pub renewed_rb_cum: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub network: Vec<NetworkRecord>,
    pub agents: Vec<AgentRecord>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.network.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    pub fn agent_ids(&self) -> Vec<AgentId> {
        let mut ids: Vec<AgentId> = self.agents.iter().map(|r| r.agent.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// Records of one agent in day order.
    pub fn agent_series<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = &'a AgentRecord> + 'a {
        self.agents.iter().filter(move |r| &r.agent == agent)
    }
}

/// What agents see when deciding on a given day.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub day: Day,
    pub forecast: Option<PowerForecast>,
    pub pledge_basis: PledgeBasis,
    pub external_rate: f64,
}

/// Hook for changing the population between days. The shipped model keeps
/// the population fixed.
pub trait PopulationUpdate {
    fn update(&mut self, day: Day, specs: &mut Vec<AgentSpec>);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPopulation;

impl PopulationUpdate for FixedPopulation {
    fn update(&mut self, _day: Day, _specs: &mut Vec<AgentSpec>) {}
}

pub struct Simulation {
    config: SimulationConfig,
    specs: Vec<AgentSpec>,
    multipliers: BTreeMap<AgentId, f64>,
    supply: SupplyState,
    power: NetworkPower,
    accounts: BTreeMap<AgentId, AgentAccount>,
    activity: BTreeMap<AgentId, (f64, f64)>,
    rbp_history: Vec<(Day, f64)>,
    qap_history: Vec<(Day, f64)>,
    last_observed: (f64, f64),
    pledge_basis: PledgeBasis,
    forecaster: Box<dyn Forecaster + Send + Sync>,
    population: Box<dyn PopulationUpdate + Send + Sync>,
    trajectory: Trajectory,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let specs = config.agent_specs()?;
        let start = config.start_day;
        let multipliers = if specs.is_empty() {
            BTreeMap::new()
        } else {
            throughput_multipliers(&specs).map_err(|source| EngineError::Agent {
                day: start,
                agent: specs[0].id.clone(),
                source,
            })?
        };
        let params = &config.supply;
        let init = &config.initial_state;
        let seed = SupplySeed {
            capped_rbp_cumsum: init.capped_rbp_cumsum.0,
            locked_reward: init.locked_reward,
            collateral: init.power.iter().map(|t| (t.expiry_day, t.pledge)).collect(),
            burnt_termination: init.burnt_termination,
        };
        let supply = SupplyState::seeded(params, start, &seed).map_err(|source| EngineError::Supply { day: start, source })?;
        let mut power = NetworkPower::new(start);
        let mut accounts: BTreeMap<AgentId, AgentAccount> =
            specs.iter().map(|s| (s.id.clone(), AgentAccount::new(s.id.clone()))).collect();
        for t in &init.power {
            let owner = AgentId::new(t.owner.clone());
            power
                .add_tranche(PowerTranche {
                    owner: owner.clone(),
                    rb_amount: t.rb.0,
                    kind: t.kind,
                    onboard_day: start,
                    expiry_day: t.expiry_day,
                })
                .map_err(|source| EngineError::Power { day: start, source })?;
            if let Some(acc) = accounts.get_mut(&owner) {
                acc.lock_pledge(t.pledge, t.expiry_day);
            }
        }
        let rbp_history: Vec<(Day, f64)> = init.history.iter().map(|h| (h.day, h.rbp.0)).collect();
        let qap_history: Vec<(Day, f64)> = init.history.iter().map(|h| (h.day, h.qap.0)).collect();
        let last_observed = (power.rbp(), power.qap());
        let supply_err = |source| EngineError::Supply { day: start, source };
        let bootstrap_minted = crate::forecast::expected_minting_rate(&[power.rbp()], &supply, params)
            .map_err(|source| EngineError::Forecast { day: start, source })?[0];
        let pledge_basis = PledgeBasis {
            delta_minted: bootstrap_minted,
            circulating: supply.circulating,
            qap: power.qap(),
            baseline: params.baseline_function(start as f64).map_err(supply_err)?,
        };
        let forecaster = Box::new(LinearExtrapolation::from(&config.forecast));
        Ok(Self {
            config,
            specs,
            multipliers,
            supply,
            power,
            activity: BTreeMap::new(),
            accounts,
            rbp_history,
            qap_history,
            last_observed,
            pledge_basis,
            forecaster,
            population: Box::new(FixedPopulation),
            trajectory: Trajectory::default(),
        })
    }

    /// Replace the power forecaster used by every agent.
    pub fn with_forecaster(mut self, forecaster: Box<dyn Forecaster + Send + Sync>) -> Self {
        self.forecaster = forecaster;
        self
    }

    pub fn with_population_update(mut self, update: Box<dyn PopulationUpdate + Send + Sync>) -> Self {
        self.population = update;
        self
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn specs(&self) -> &[AgentSpec] {
        &self.specs
    }

    pub fn supply(&self) -> &SupplyState {
        &self.supply
    }

    pub fn power(&self) -> &NetworkPower {
        &self.power
    }

    /// Mutable ledger access for perturbation experiments.
    pub fn power_mut(&mut self) -> &mut NetworkPower {
        &mut self.power
    }

    pub fn accounts(&self) -> &BTreeMap<AgentId, AgentAccount> {
        &self.accounts
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(mut self) -> Trajectory {
        self.trajectory.warnings = std::mem::take(&mut self.power.warnings);
        self.trajectory
    }

    pub fn current_day(&self) -> Day {
        self.supply.day
    }

    pub fn is_finished(&self) -> bool {
        self.supply.day >= self.config.end_day
    }

    /// Release due tranches and expire power for the current day.
    pub fn begin_day(&mut self) {
        let day = self.supply.day;
        self.supply.release_due();
        for acc in self.accounts.values_mut() {
            acc.release_due(day);
        }
        self.power.expire_step(day);
    }

    fn needs_forecast(&self) -> bool {
        self.specs.iter().any(|s| !matches!(s.strategy, Strategy::Dca))
    }

    /// Build today's observation from history through yesterday.
    pub fn observe(&self) -> Result<Observation, EngineError> {
        let day = self.supply.day;
        let rate = external_rate(&self.config.external_rate, day)?;
        let forecast = if self.needs_forecast() {
            let longest = self
                .specs
                .iter()
                .flat_map(|s| s.candidate_durations.iter().copied())
                .max()
                .unwrap_or(1) as usize;
            let remaining = (self.config.end_day - day).max(1) as usize;
            let horizon = remaining.max(longest);
            Some(
                PowerForecast::build(
                    self.forecaster.as_ref(),
                    &self.rbp_history,
                    &self.qap_history,
                    self.last_observed,
                    &self.supply,
                    &self.config.supply,
                    &self.config.forecast,
                    horizon,
                )
                .map_err(|source| EngineError::Forecast { day, source })?,
            )
        } else {
            None
        };
        Ok(Observation { day, forecast, pledge_basis: self.pledge_basis, external_rate: rate })
    }

    /// Each agent's decision for the observed day, in agent-id order.
    pub fn decide(&self, obs: &Observation) -> Result<Vec<PowerDecision>, EngineError> {
        let params = &self.config.supply;
        let sector_size = self.config.forecast.sector_size.0;
        self.specs
            .iter()
            .map(|spec| {
                let agent_err = |source| EngineError::Agent { day: obs.day, agent: spec.id.clone(), source };
                let scale = self.multipliers.get(&spec.id).copied().unwrap_or(1.0);
                let expiring = self.power.expiring_cc(&spec.id);
                if let Strategy::Dca = spec.strategy {
                    return Ok(dca_decide(spec, scale, expiring));
                }
                let quality = spec.sector_quality();
                let forecast = obs.forecast.as_ref().expect("forecast built for forecasting agents");
                let rewards = forecast.rewards_for_quality(quality);
                let pledge = obs
                    .pledge_basis
                    .pledge_per_sector(params, sector_size, quality)
                    .map_err(|e| agent_err(AgentError::Supply(e)))?;
                match spec.strategy {
                    Strategy::Fofr { threshold } => {
                        if pledge <= 0.0 {
                            // collateral is free: any positive return clears the gate
                            return Ok(dca_decide(spec, scale, expiring));
                        }
                        fofr_decide(spec, threshold, scale, &rewards, pledge, expiring).map_err(agent_err)
                    }
                    Strategy::Npv { discount_rate } => {
                        npv_decide(spec, discount_rate, scale, &rewards, pledge, obs.external_rate, expiring)
                            .map_err(agent_err)
                    }
                    Strategy::Dca => unreachable!(),
                }
            })
            .collect()
    }

    /// Apply the day's decisions and close the day.
    pub fn apply(&mut self, obs: &Observation, mut decisions: Vec<PowerDecision>) -> Result<(), EngineError> {
        let day = self.supply.day;
        let params = self.config.supply.clone();
        let supply_err = |source| EngineError::Supply { day, source };
        let power_err = |source| EngineError::Power { day, source };
        decisions.sort_by(|a, b| a.agent.cmp(&b.agent));

        let pledge_circulating = self.supply.circulating;
        let mut pledge_events: Vec<(AgentId, f64, Day)> = Vec::new();
        let mut terminated_qa = 0.0;
        let (mut onboarded, mut onboarded_deal, mut renewed) = (0.0, 0.0, 0.0);
        for d in &decisions {
            if d.terminate_rb > 0.0 {
                terminated_qa += self.power.terminate(&d.agent, d.terminate_rb).map_err(power_err)?;
            }
            if d.onboard_rb > 0.0 {
                let dq = self
                    .power
                    .onboard(&d.agent, d.onboard_rb, d.fil_plus_fraction, d.duration)
                    .map_err(power_err)?;
                onboarded += d.onboard_rb;
                self.activity.entry(d.agent.clone()).or_default().0 += d.onboard_rb;
                onboarded_deal += d.onboard_rb * d.fil_plus_fraction;
                pledge_events.push((d.agent.clone(), dq, day + Day::from(d.duration)));
            }
            if d.renew_rb > 0.0 {
                let r = self.power.renew(&d.agent, d.renew_rb, d.renew_duration).map_err(power_err)?;
                renewed += r.renewed_rb;
                self.activity.entry(d.agent.clone()).or_default().1 += r.renewed_rb;
                pledge_events.push((d.agent.clone(), r.delta_qap, day + Day::from(d.renew_duration)));
            }
        }

        let rbp = self.power.rbp();
        let qap = self.power.qap();
        self.supply.accumulate_capped_rbp(rbp, &params).map_err(supply_err)?;
        let delta_minted = self.supply.mint(&params).map_err(supply_err)?;
        let baseline = params.baseline_function(day as f64).map_err(supply_err)?;

        for (agent, dq, release_day) in pledge_events {
            if dq <= 0.0 {
                continue;
            }
            let storage = params.storage_pledge_delta(delta_minted, dq, qap).map_err(supply_err)?;
            let consensus = params
                .consensus_pledge_delta(pledge_circulating, dq, qap, baseline)
                .map_err(supply_err)?;
            let pledge = storage + consensus;
            self.supply.lock_collateral(pledge, release_day).map_err(supply_err)?;
            if let Some(acc) = self.accounts.get_mut(&agent) {
                acc.lock_pledge(pledge, release_day);
            }
        }
        self.supply.lock_daily_reward(delta_minted, &params).map_err(supply_err)?;
        self.supply.update_vesting(&params);
        let termination_fees = if terminated_qa > 0.0 {
            params.termination_fee_days * delta_minted * terminated_qa / (qap + terminated_qa)
        } else {
            0.0
        };
        self.supply.burn_step(termination_fees, &params).map_err(supply_err)?;
        self.supply.circulating_supply_step().map_err(supply_err)?;
        self.check_pools()?;

        let per_agent_qap = self.power.per_agent_qap();
        let rewards = distribute_rewards(delta_minted, &per_agent_qap, qap);
        for (id, acc) in self.accounts.iter_mut() {
            let reward = rewards.get(id).copied().unwrap_or(0.0);
            acc.credit_reward(reward);
            acc.accrue_borrow_cost(obs.external_rate);
            acc.close_day();
            let (onboarded_rb_cum, renewed_rb_cum) = self.activity.get(id).copied().unwrap_or_default();
            self.trajectory.agents.push(AgentRecord {
                day,
                agent: id.clone(),
                qap: per_agent_qap.get(id).copied().unwrap_or(0.0),
                daily_reward: reward,
                cum_reward: acc.rewards_earned_cum,
                pledge_outstanding: acc.pledge_outstanding,
                borrow_cost_cum: acc.borrow_cost_cum,
                net_cum_reward: acc.net_reward(),
                onboarded_rb_cum,
                renewed_rb_cum,
            });
        }

        let sector = self.config.forecast.sector_size.0;
        let decision_pledge = obs.pledge_basis.pledge_per_sector(&params, sector, 1.0).map_err(supply_err)?;
        let basis = PledgeBasis { delta_minted, circulating: pledge_circulating, qap, baseline };
        let realized_pledge = basis.pledge_per_sector(&params, sector, 1.0).map_err(supply_err)?;
        let s = &self.supply;
        self.trajectory.network.push(NetworkRecord {
            day,
            rbp,
            qap,
            rbp_cc: self.power.rbp_cc,
            rbp_deal: self.power.rbp_deal,
            baseline,
            capped_rbp_cumsum: s.capped_rbp_cumsum,
            delta_minted,
            minted_cum: s.minted_cum,
            vested_cum: s.vested_cum,
            locked_reward: s.locked_reward,
            locked_collateral: s.locked_collateral,
            burnt_termination: s.burnt_termination,
            burnt_gas: s.burnt_gas,
            burnt_cum: s.burnt_cum,
            circulating: s.circulating,
            onboarded_rb: onboarded,
            onboarded_deal_rb: onboarded_deal,
            renewed_rb: renewed,
            external_rate: obs.external_rate,
            pledge_circulating,
            decision_pledge_per_sector: decision_pledge,
            realized_pledge_per_sector: realized_pledge,
        });

        self.rbp_history.push((day, rbp));
        self.qap_history.push((day, qap));
        self.last_observed = (rbp, qap);
        self.pledge_basis = basis;
        self.supply.finish_day();
        self.population.update(day, &mut self.specs);
        Ok(())
    }

    fn check_pools(&self) -> Result<(), EngineError> {
        let s = &self.supply;
        let pools = [
            ("minted", s.minted_cum),
            ("vested", s.vested_cum),
            ("locked_reward", s.locked_reward),
            ("locked_collateral", s.locked_collateral),
            ("burnt", s.burnt_cum),
        ];
        if pools.iter().any(|(_, v)| !(*v >= 0.0)) {
            let pools = pools.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(", ");
            return Err(EngineError::NegativePool { day: s.day, pools });
        }
        Ok(())
    }

    /// Run one full day with the agents' own strategies.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.is_finished() {
            return Err(EngineError::Finished(self.supply.day));
        }
        self.begin_day();
        let obs = self.observe()?;
        let decisions = self.decide(&obs)?;
        self.apply(&obs, decisions)
    }

    /// Run one full day with externally supplied decisions.
    pub fn step_with(&mut self, decisions: Vec<PowerDecision>) -> Result<(), EngineError> {
        if self.is_finished() {
            return Err(EngineError::Finished(self.supply.day));
        }
        self.begin_day();
        let obs = self.observe()?;
        self.apply(&obs, decisions)
    }

    pub fn run_to_end(mut self) -> Result<Trajectory, EngineError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.into_trajectory())
    }
}

/// Run a configuration from `start_day` to `end_day`.
pub fn run(config: &SimulationConfig) -> Result<Trajectory, EngineError> {
    Simulation::new(config.clone())?.run_to_end()
}
