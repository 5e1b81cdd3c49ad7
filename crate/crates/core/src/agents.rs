//! Storage-provider strategies and their bookkeeping.
//!
//! Three strategies ship:
//!
//! * **DCA** onboards a constant amount every day and renews a fixed share of
//!   its expiring CC power, ignoring forecasts.
//! * **FoFR** onboards when forecast rewards over pledge for some candidate
//!   duration reaches its threshold.
//! * **NPV** onboards at the duration with the highest net present value of
//!   forecast rewards minus costs, provided that value is non-negative.
//!
//! Daily throughput of every strategy is scaled by the agent's relative
//! capitalization `c_i = a_i / sum(a)`, normalized so that equal weights give
//! a scale of exactly 1.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::power::{AgentId, FIL_PLUS_MULTIPLIER};
use crate::supply::{SupplyError, SupplyParams};
use crate::Day;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("pledge per sector must be positive, got {0}")]
    NonPositivePledge(f64),
    #[error("forecast covers {available} days but duration {duration} was requested")]
    ShortForecast { available: usize, duration: u32 },
    #[error("agent list is empty")]
    EmptyPopulation,
    #[error("capitalization weight of {agent} must be positive, got {weight}")]
    InvalidWeight { agent: AgentId, weight: f64 },
    #[error(transparent)]
    Supply(#[from] SupplyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Dca,
    Fofr { threshold: f64 },
    /// `discount_rate` is per year.
    Npv { discount_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub strategy: Strategy,
    /// Base onboarding quota in raw bytes per day.
    pub daily_onboard_rb: f64,
    pub fil_plus_fraction: f64,
    pub renewal_fraction: f64,
    /// Commitment lengths considered, in days. DCA uses the first entry.
    pub candidate_durations: Vec<u32>,
    pub capitalization_weight: f64,
    /// Additional cost per sector in FIL, added to the pledge borrowing cost.
    pub extra_cost_per_sector: f64,
}

impl AgentSpec {
    /// Quality multiplier of this agent's sectors.
    pub fn sector_quality(&self) -> f64 {
        1.0 + (FIL_PLUS_MULTIPLIER - 1.0) * self.fil_plus_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerDecision {
    pub agent: AgentId,
    pub onboard_rb: f64,
    pub fil_plus_fraction: f64,
    pub duration: u32,
    pub renew_rb: f64,
    pub renew_duration: u32,
    pub terminate_rb: f64,
}

impl PowerDecision {
    pub fn idle(agent: &AgentId) -> Self {
        Self {
            agent: agent.clone(),
            onboard_rb: 0.0,
            fil_plus_fraction: 0.0,
            duration: 1,
            renew_rb: 0.0,
            renew_duration: 1,
            terminate_rb: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.onboard_rb == 0.0 && self.renew_rb == 0.0 && self.terminate_rb == 0.0
    }

    fn act(spec: &AgentSpec, scale: f64, duration: u32, expiring_cc: f64) -> Self {
        Self {
            agent: spec.id.clone(),
            onboard_rb: spec.daily_onboard_rb * scale,
            fil_plus_fraction: spec.fil_plus_fraction,
            duration,
            renew_rb: spec.renewal_fraction * expiring_cc,
            renew_duration: duration,
            terminate_rb: 0.0,
        }
    }
}

/// Network quantities from the previous day used to price a new sector's
/// collateral before today's power is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PledgeBasis {
    pub delta_minted: f64,
    pub circulating: f64,
    pub qap: f64,
    pub baseline: f64,
}

impl PledgeBasis {
    /// Storage plus consensus pledge of one sector of the given quality.
    pub fn pledge_per_sector(&self, params: &SupplyParams, sector_size: f64, quality: f64) -> Result<f64, SupplyError> {
        let sector_qa = sector_size * quality;
        let qap_after = self.qap + sector_qa;
        let storage = params.storage_pledge_delta(self.delta_minted, sector_qa, qap_after)?;
        let consensus = params.consensus_pledge_delta(self.circulating, sector_qa, qap_after, self.baseline)?;
        Ok(storage + consensus)
    }
}

/// Relative capitalization `c_i = a_i / sum(a)` per agent.
pub fn capitalization_scale(specs: &[AgentSpec]) -> Result<BTreeMap<AgentId, f64>, AgentError> {
    if specs.is_empty() {
        return Err(AgentError::EmptyPopulation);
    }
    for s in specs {
        if !(s.capitalization_weight.is_finite() && s.capitalization_weight > 0.0) {
            return Err(AgentError::InvalidWeight { agent: s.id.clone(), weight: s.capitalization_weight });
        }
    }
    let total: f64 = specs.iter().map(|s| s.capitalization_weight).sum();
    Ok(specs
        .iter()
        .map(|s| (s.id.clone(), s.capitalization_weight / total))
        .collect())
}

/// Throughput multipliers `c_i * N`; equal weights map to 1.
pub fn throughput_multipliers(specs: &[AgentSpec]) -> Result<BTreeMap<AgentId, f64>, AgentError> {
    let n = specs.len() as f64;
    Ok(capitalization_scale(specs)?
        .into_iter()
        .map(|(id, c)| (id, c * n))
        .collect())
}

pub fn dca_decide(spec: &AgentSpec, scale: f64, expiring_cc: f64) -> PowerDecision {
    let duration = spec.candidate_durations.first().copied().unwrap_or(1);
    PowerDecision::act(spec, scale, duration, expiring_cc)
}

fn window(rewards: &[f64], duration: u32) -> Result<&[f64], AgentError> {
    rewards
        .get(..duration as usize)
        .ok_or(AgentError::ShortForecast { available: rewards.len(), duration })
}

/// Forecast rewards over `duration` days divided by the pledge of one sector.
pub fn estimate_fofr(rewards_per_sector: &[f64], duration: u32, pledge_per_sector_prev: f64) -> Result<f64, AgentError> {
    if !(pledge_per_sector_prev > 0.0) {
        return Err(AgentError::NonPositivePledge(pledge_per_sector_prev));
    }
    Ok(window(rewards_per_sector, duration)?.iter().sum::<f64>() / pledge_per_sector_prev)
}

/// Candidate with the highest score; ties go to the shortest duration.
fn best_duration(
    durations: &[u32],
    mut score: impl FnMut(u32) -> Result<f64, AgentError>,
) -> Result<Option<(u32, f64)>, AgentError> {
    let mut sorted = durations.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(u32, f64)> = None;
    for d in sorted {
        let v = score(d)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((d, v));
        }
    }
    Ok(best)
}

pub fn fofr_decide(
    spec: &AgentSpec,
    threshold: f64,
    scale: f64,
    rewards_per_sector: &[f64],
    pledge_prev: f64,
    expiring_cc: f64,
) -> Result<PowerDecision, AgentError> {
    let best = best_duration(&spec.candidate_durations, |d| estimate_fofr(rewards_per_sector, d, pledge_prev))?;
    Ok(match best {
        Some((duration, fofr)) if fofr >= threshold => PowerDecision::act(spec, scale, duration, expiring_cc),
        _ => PowerDecision::idle(&spec.id),
    })
}

/// Cost of borrowing `pledge` for `duration` days at `annual_rate`,
/// continuously compounded.
pub fn borrowing_cost(pledge: f64, annual_rate: f64, duration: u32) -> f64 {
    pledge * (annual_rate * duration as f64 / 365.0).exp_m1()
}

/// Present value of `duration` days of rewards, each discounted
/// continuously from the end of its day, minus `cost_per_sector`.
pub fn npv_of_duration(
    rewards_per_sector: &[f64],
    duration: u32,
    cost_per_sector: f64,
    discount_rate: f64,
) -> Result<f64, AgentError> {
    let pv: f64 = window(rewards_per_sector, duration)?
        .iter()
        .enumerate()
        .map(|(k, r)| r * (-discount_rate * (k + 1) as f64 / 365.0).exp())
        .sum();
    Ok(pv - cost_per_sector)
}

pub fn npv_decide(
    spec: &AgentSpec,
    discount_rate: f64,
    scale: f64,
    rewards_per_sector: &[f64],
    pledge_prev: f64,
    external_rate: f64,
    expiring_cc: f64,
) -> Result<PowerDecision, AgentError> {
    let best = best_duration(&spec.candidate_durations, |d| {
        let cost = borrowing_cost(pledge_prev, external_rate, d) + spec.extra_cost_per_sector;
        npv_of_duration(rewards_per_sector, d, cost, discount_rate)
    })?;
    Ok(match best {
        Some((duration, npv)) if npv >= 0.0 => PowerDecision::act(spec, scale, duration, expiring_cc),
        _ => PowerDecision::idle(&spec.id),
    })
}

/// Per-agent reward and collateral bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentAccount {
    pub agent: AgentId,
    pub rewards_earned_cum: f64,
    pub pledge_outstanding: f64,
    pub borrow_cost_cum: f64,
    pub net_reward_trajectory: Vec<f64>,
    pub pending_pledge_releases: BTreeMap<Day, f64>,
}

impl AgentAccount {
    pub fn new(agent: AgentId) -> Self {
        Self {
            agent,
            rewards_earned_cum: 0.0,
            pledge_outstanding: 0.0,
            borrow_cost_cum: 0.0,
            net_reward_trajectory: Vec::new(),
            pending_pledge_releases: BTreeMap::new(),
        }
    }

    pub fn net_reward(&self) -> f64 {
        self.rewards_earned_cum - self.borrow_cost_cum
    }

    pub fn lock_pledge(&mut self, amount: f64, release_day: Day) {
        if amount > 0.0 {
            self.pledge_outstanding += amount;
            *self.pending_pledge_releases.entry(release_day).or_default() += amount;
        }
    }

    pub fn release_due(&mut self, day: Day) -> f64 {
        let released = self.pending_pledge_releases.remove(&day).unwrap_or(0.0);
        self.pledge_outstanding = (self.pledge_outstanding - released).max(0.0);
        if self.pending_pledge_releases.is_empty() {
            self.pledge_outstanding = 0.0;
        }
        released
    }

    pub fn credit_reward(&mut self, amount: f64) {
        self.rewards_earned_cum += amount.max(0.0);
    }

    /// Interest for one day on the outstanding pledge. Returns the day's cost.
    pub fn accrue_borrow_cost(&mut self, annual_rate: f64) -> f64 {
        let cost = self.pledge_outstanding * (annual_rate / 365.0).exp_m1();
        self.borrow_cost_cum += cost;
        cost
    }

    pub fn close_day(&mut self) {
        self.net_reward_trajectory.push(self.net_reward());
    }
}
