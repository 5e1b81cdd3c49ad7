//! Token flows of the storage network: simple and baseline minting, linear
//! vesting, reward and collateral locking, burning and the circulating
//! supply identity `S = M + V - L - B`.
//!
//! Quantities are FIL (`f64`), power is bytes and time is in whole days.
//! Pool values held in [`SupplyState`] after the engine processes day `d`
//! are the values "through day `d`": minted is `M^S(d) + M^B(R(d))` where
//! `R(d)` is the capped raw-byte power summed over every processed day up to
//! and including `d`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{Bytes, EIB};
use crate::Day;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupplyError {
    #[error("day index must be non-negative, got {0}")]
    NegativeDay(f64),
    #[error("{what} must be non-negative and finite, got {value}")]
    NegativeInput { what: &'static str, value: f64 },
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("release day {release_day} must be after the current day {day}")]
    ReleaseNotInFuture { release_day: Day, day: Day },
    #[error("circulating supply became negative on day {day}: {value}")]
    NegativeCirculating { day: Day, value: f64 },
    #[error("invalid supply parameters: {0}")]
    InvalidParams(String),
}

/// How the storage-pledge component of newly locked collateral is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoragePledgeMode {
    /// `multiplier * delta_minted * delta_qap / qap_total`: the onboarder's
    /// share of the day's issuance.
    #[default]
    ShareScaled,
    /// `multiplier * delta_minted` for every onboarding event regardless of
    /// its size.
    NetworkAggregate,
}

/// A linear vesting schedule for one recipient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VestingSchedule {
    pub recipient_id: String,
    pub total_amount: f64,
    pub start_day: Day,
    pub duration_days: u32,
}

impl VestingSchedule {
    /// Amount vested by day `d`.
    pub fn vested_at(&self, d: f64) -> f64 {
        let elapsed = (d - self.start_day as f64) / self.duration_days as f64;
        elapsed.clamp(0.0, 1.0) * self.total_amount
    }
}

/// Cumulative vested supply across all schedules.
pub fn vesting_cumulative(d: f64, schedules: &[VestingSchedule]) -> f64 {
    schedules.iter().map(|s| s.vested_at(d)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupplyParams {
    pub max_supply: f64,
    pub simple_fraction: f64,
    pub baseline_fraction: f64,
    /// Simple-minting decay rate per day.
    pub lambda: f64,
    /// Baseline storage growth rate per day.
    pub g: f64,
    /// Baseline storage on day 0.
    pub b0: Bytes,
    pub reward_vest_fraction: f64,
    pub reward_vest_days: u32,
    pub storage_pledge_days_multiplier: f64,
    pub consensus_pledge_fraction: f64,
    /// Gas burn in FIL per day.
    pub gas_burn_rate_beta: f64,
    pub vesting_schedules: Vec<VestingSchedule>,
    pub storage_pledge_mode: StoragePledgeMode,
    /// Termination fee, in days of the terminated power's current reward.
    pub termination_fee_days: f64,
}

pub const MAX_VESTING_TOTAL: f64 = 0.9e9;

impl Default for SupplyParams {
    fn default() -> Self {
        Self {
            max_supply: 1.1e9,
            simple_fraction: 0.3,
            baseline_fraction: 0.7,
            lambda: LN_2 / (6.0 * 365.0),
            g: LN_2 / 365.0,
            b0: Bytes(2.888888888 * EIB),
            reward_vest_fraction: 0.75,
            reward_vest_days: 180,
            storage_pledge_days_multiplier: 20.0,
            consensus_pledge_fraction: 0.3,
            gas_burn_rate_beta: 0.0,
            vesting_schedules: Vec::new(),
            storage_pledge_mode: StoragePledgeMode::ShareScaled,
            termination_fee_days: 90.0,
        }
    }
}

fn check_non_negative(what: &'static str, value: f64) -> Result<(), SupplyError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SupplyError::NegativeInput { what, value })
    }
}

fn check_day(d: f64) -> Result<(), SupplyError> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(SupplyError::NegativeDay(d))
    }
}

impl SupplyParams {
    pub fn validate(&self) -> Result<(), SupplyError> {
        let bad = |msg: String| Err(SupplyError::InvalidParams(msg));
        if !(self.max_supply.is_finite() && self.max_supply > 0.0) {
            return bad(format!("max_supply must be positive, got {}", self.max_supply));
        }
        for (name, v) in [
            ("simple_fraction", self.simple_fraction),
            ("baseline_fraction", self.baseline_fraction),
            ("reward_vest_fraction", self.reward_vest_fraction),
            ("consensus_pledge_fraction", self.consensus_pledge_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if (self.simple_fraction + self.baseline_fraction - 1.0).abs() > 1e-12 {
            return bad("simple_fraction + baseline_fraction must equal 1".into());
        }
        for (name, v) in [("lambda", self.lambda), ("g", self.g), ("b0", self.b0.0)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.reward_vest_days == 0 {
            return bad("reward_vest_days must be at least 1".into());
        }
        for (name, v) in [
            ("storage_pledge_days_multiplier", self.storage_pledge_days_multiplier),
            ("gas_burn_rate_beta", self.gas_burn_rate_beta),
            ("termination_fee_days", self.termination_fee_days),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        let mut total = 0.0;
        for (i, s) in self.vesting_schedules.iter().enumerate() {
            if !(s.total_amount.is_finite() && s.total_amount >= 0.0) {
                return bad(format!("vesting_schedules[{i}].total_amount must be non-negative"));
            }
            if s.duration_days < 1 {
                return bad(format!("vesting_schedules[{i}].duration_days must be at least 1"));
            }
            total += s.total_amount;
        }
        if total > MAX_VESTING_TOTAL * (1.0 + 1e-12) {
            return bad(format!("vesting schedules total {total} exceeds {MAX_VESTING_TOTAL}"));
        }
        Ok(())
    }

    /// Asymptotic simple-minting supply.
    pub fn simple_supply_cap(&self) -> f64 {
        self.simple_fraction * self.max_supply
    }

    /// Asymptotic baseline-minting supply.
    pub fn baseline_supply_cap(&self) -> f64 {
        self.baseline_fraction * self.max_supply
    }

    /// Cumulative simple minting by day `d`: `M_inf^S (1 - e^{-lambda d})`.
    pub fn simple_minting_cumulative(&self, d: f64) -> Result<f64, SupplyError> {
        check_day(d)?;
        Ok(self.simple_supply_cap() * -(-self.lambda * d).exp_m1())
    }

    /// Baseline storage target `b0 e^{g d}` in bytes.
    pub fn baseline_function(&self, d: f64) -> Result<f64, SupplyError> {
        check_day(d)?;
        Ok(self.b0.0 * (self.g * d).exp())
    }

    /// Effective network time `(1/g) ln(g R / b0 + 1)` for a cumulative
    /// capped raw-byte power `R` (byte-days).
    pub fn effective_network_time(&self, capped_rbp_cumsum: f64) -> Result<f64, SupplyError> {
        check_non_negative("capped_rbp_cumsum", capped_rbp_cumsum)?;
        Ok((self.g * capped_rbp_cumsum / self.b0.0).ln_1p() / self.g)
    }

    /// Cumulative baseline minting from the cumulative capped raw-byte power,
    /// `M_inf^B (1 - (g R / b0 + 1)^{-lambda/g})`.
    pub fn baseline_minting_cumulative(&self, capped_rbp_cumsum: f64) -> Result<f64, SupplyError> {
        check_non_negative("capped_rbp_cumsum", capped_rbp_cumsum)?;
        let exponent = -(self.lambda / self.g) * (self.g * capped_rbp_cumsum / self.b0.0).ln_1p();
        Ok(self.baseline_supply_cap() * -exponent.exp_m1())
    }

    /// Total minted through day `d` given the capped power summed through `d`.
    pub fn minted_cumulative(&self, d: f64, capped_rbp_cumsum: f64) -> Result<f64, SupplyError> {
        Ok(self.simple_minting_cumulative(d)? + self.baseline_minting_cumulative(capped_rbp_cumsum)?)
    }

    /// Storage-pledge collateral for an onboarding of `delta_qap` bytes.
    pub fn storage_pledge_delta(
        &self,
        delta_minted: f64,
        delta_qap: f64,
        qap_total: f64,
    ) -> Result<f64, SupplyError> {
        check_non_negative("delta_minted", delta_minted)?;
        check_non_negative("delta_qap", delta_qap)?;
        check_non_negative("qap_total", qap_total)?;
        let full = (self.storage_pledge_days_multiplier * delta_minted).max(0.0);
        match self.storage_pledge_mode {
            StoragePledgeMode::NetworkAggregate => Ok(full),
            StoragePledgeMode::ShareScaled => {
                if delta_qap == 0.0 {
                    return Ok(0.0);
                }
                if qap_total == 0.0 {
                    return Err(SupplyError::DivisionByZero("qap_total is zero with positive delta_qap"));
                }
                Ok(full * (delta_qap / qap_total))
            }
        }
    }

    /// Consensus-pledge collateral `0.3 S dQAP / max(QAP, b_d)`.
    pub fn consensus_pledge_delta(
        &self,
        circulating: f64,
        delta_qap: f64,
        qap_total: f64,
        baseline: f64,
    ) -> Result<f64, SupplyError> {
        check_non_negative("circulating", circulating)?;
        check_non_negative("delta_qap", delta_qap)?;
        check_non_negative("qap_total", qap_total)?;
        check_non_negative("baseline", baseline)?;
        let denominator = qap_total.max(baseline);
        if denominator == 0.0 {
            return Err(SupplyError::DivisionByZero("both qap_total and baseline are zero"));
        }
        Ok((self.consensus_pledge_fraction * circulating * delta_qap / denominator).max(0.0))
    }
}

/// Token pools of a running simulation.
///
/// `day` is the next day to be processed; after [`SupplyState::finish_day`]
/// the pools hold their values through `day - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyState {
    pub day: Day,
    pub minted_cum: f64,
    pub capped_rbp_cumsum: f64,
    pub vested_cum: f64,
    pub locked_reward: f64,
    pub locked_collateral: f64,
    pub burnt_termination: f64,
    pub burnt_gas: f64,
    pub burnt_cum: f64,
    pub circulating: f64,
    pub pending_reward_releases: BTreeMap<Day, f64>,
    pub pending_collateral_releases: BTreeMap<Day, f64>,
    /// Totals used by the conservation checks.
    pub reward_locked_total: f64,
    pub reward_released_total: f64,
    pub collateral_locked_total: f64,
    pub collateral_released_total: f64,
    /// Cumulative capped power before the current day's increment.
    capped_at_day_start: f64,
}

/// Starting pools for a simulation that does not begin at genesis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SupplySeed {
    pub capped_rbp_cumsum: f64,
    /// Locked rewards released linearly over the reward-vesting period.
    pub locked_reward: f64,
    /// Collateral with its release days.
    pub collateral: Vec<(Day, f64)>,
    pub burnt_termination: f64,
}

impl SupplyState {
    /// Empty pools at `start_day`.
    pub fn new(params: &SupplyParams, start_day: Day) -> Result<Self, SupplyError> {
        Self::seeded(params, start_day, &SupplySeed::default())
    }

    /// Pools at `start_day` from a seed describing the prior history. Minted
    /// and vested totals are derived from the issuance curves so that daily
    /// increments stay consistent with the closed forms.
    pub fn seeded(params: &SupplyParams, start_day: Day, seed: &SupplySeed) -> Result<Self, SupplyError> {
        check_day(start_day as f64)?;
        check_non_negative("capped_rbp_cumsum", seed.capped_rbp_cumsum)?;
        check_non_negative("locked_reward", seed.locked_reward)?;
        check_non_negative("burnt_termination", seed.burnt_termination)?;
        let prev_day = (start_day - 1).max(0) as f64;
        let minted_cum = if start_day == 0 {
            params.baseline_minting_cumulative(seed.capped_rbp_cumsum)?
        } else {
            params.minted_cumulative(prev_day, seed.capped_rbp_cumsum)?
        };
        let vested_cum = if start_day == 0 {
            0.0
        } else {
            vesting_cumulative(prev_day, &params.vesting_schedules)
        };
        let mut state = Self {
            day: start_day,
            minted_cum,
            capped_rbp_cumsum: seed.capped_rbp_cumsum,
            vested_cum,
            locked_reward: 0.0,
            locked_collateral: 0.0,
            burnt_termination: seed.burnt_termination,
            burnt_gas: params.gas_burn_rate_beta * prev_day,
            burnt_cum: 0.0,
            circulating: 0.0,
            pending_reward_releases: BTreeMap::new(),
            pending_collateral_releases: BTreeMap::new(),
            reward_locked_total: 0.0,
            reward_released_total: 0.0,
            collateral_locked_total: 0.0,
            collateral_released_total: 0.0,
            capped_at_day_start: seed.capped_rbp_cumsum,
        };
        state.burnt_cum = state.burnt_termination + state.burnt_gas;
        if seed.locked_reward > 0.0 {
            let tranche = seed.locked_reward / params.reward_vest_days as f64;
            for k in 0..params.reward_vest_days as Day {
                *state.pending_reward_releases.entry(start_day + k).or_default() += tranche;
            }
            state.locked_reward = seed.locked_reward;
            state.reward_locked_total = seed.locked_reward;
        }
        for &(release_day, amount) in &seed.collateral {
            check_non_negative("collateral", amount)?;
            if release_day < start_day {
                return Err(SupplyError::ReleaseNotInFuture { release_day, day: start_day });
            }
            *state.pending_collateral_releases.entry(release_day).or_default() += amount;
            state.locked_collateral += amount;
            state.collateral_locked_total += amount;
        }
        state.circulating = state.identity_value();
        if state.circulating < 0.0 {
            return Err(SupplyError::NegativeCirculating { day: start_day, value: state.circulating });
        }
        Ok(state)
    }

    pub fn locked(&self) -> f64 {
        self.locked_reward + self.locked_collateral
    }

    /// `M + V - L - B` from the current pools.
    pub fn identity_value(&self) -> f64 {
        self.minted_cum + self.vested_cum - self.locked() - self.burnt_cum
    }

    /// Release reward and collateral tranches due on the current day.
    /// Returns `(reward_released, collateral_released)`.
    pub fn release_due(&mut self) -> (f64, f64) {
        let day = self.day;
        let reward = self.pending_reward_releases.remove(&day).unwrap_or(0.0);
        let collateral = self.pending_collateral_releases.remove(&day).unwrap_or(0.0);
        self.locked_reward = (self.locked_reward - reward).max(0.0);
        self.locked_collateral = (self.locked_collateral - collateral).max(0.0);
        self.reward_released_total += reward;
        self.collateral_released_total += collateral;
        (reward, collateral)
    }

    /// Add today's baseline-capped raw-byte power. Returns the increment.
    pub fn accumulate_capped_rbp(&mut self, rbp_today: f64, params: &SupplyParams) -> Result<f64, SupplyError> {
        check_non_negative("rbp_today", rbp_today)?;
        let baseline = params.baseline_function(self.day as f64)?;
        let increment = baseline.min(rbp_today);
        self.capped_rbp_cumsum += increment;
        Ok(increment)
    }

    /// Minted increment for the current day from the capped power summed so
    /// far. Updates `minted_cum` and returns the increment.
    pub fn mint(&mut self, params: &SupplyParams) -> Result<f64, SupplyError> {
        let d = self.day as f64;
        let before = if self.day == 0 {
            params.baseline_minting_cumulative(self.capped_at_day_start)?
        } else {
            params.minted_cumulative(d - 1.0, self.capped_at_day_start)?
        };
        let after = params.minted_cumulative(d, self.capped_rbp_cumsum)?;
        let delta = (after - before).max(0.0);
        self.minted_cum += delta;
        Ok(delta)
    }

    /// Lock the vesting share of today's minted rewards and schedule its
    /// release in equal daily tranches starting tomorrow.
    pub fn lock_daily_reward(&mut self, delta_minted: f64, params: &SupplyParams) -> Result<(), SupplyError> {
        check_non_negative("delta_minted", delta_minted)?;
        if delta_minted == 0.0 {
            return Ok(());
        }
        let locked = params.reward_vest_fraction * delta_minted;
        let tranche = locked / params.reward_vest_days as f64;
        for k in 1..=params.reward_vest_days as Day {
            *self.pending_reward_releases.entry(self.day + k).or_default() += tranche;
        }
        self.locked_reward += locked;
        self.reward_locked_total += locked;
        Ok(())
    }

    /// Lock collateral until `release_day`, when it is released in full.
    pub fn lock_collateral(&mut self, new_collateral: f64, release_day: Day) -> Result<(), SupplyError> {
        check_non_negative("new_collateral", new_collateral)?;
        if release_day <= self.day {
            return Err(SupplyError::ReleaseNotInFuture { release_day, day: self.day });
        }
        if new_collateral == 0.0 {
            return Ok(());
        }
        *self.pending_collateral_releases.entry(release_day).or_default() += new_collateral;
        self.locked_collateral += new_collateral;
        self.collateral_locked_total += new_collateral;
        Ok(())
    }

    /// Recompute vested supply for the current day.
    pub fn update_vesting(&mut self, params: &SupplyParams) {
        self.vested_cum = vesting_cumulative(self.day as f64, &params.vesting_schedules);
    }

    /// Add termination fees and recompute the linear gas burn.
    pub fn burn_step(&mut self, termination_fees: f64, params: &SupplyParams) -> Result<(), SupplyError> {
        check_non_negative("termination_fees", termination_fees)?;
        self.burnt_termination += termination_fees;
        self.burnt_gas = params.gas_burn_rate_beta * self.day as f64;
        self.burnt_cum = self.burnt_termination + self.burnt_gas;
        Ok(())
    }

    /// Recompute the circulating supply from the pools.
    pub fn circulating_supply_step(&mut self) -> Result<f64, SupplyError> {
        let value = self.identity_value();
        let tolerance = 1e-9 * (self.minted_cum + self.vested_cum).max(1.0);
        if value < -tolerance {
            return Err(SupplyError::NegativeCirculating { day: self.day, value });
        }
        self.circulating = value;
        Ok(value)
    }

    /// Close the current day and move to the next one.
    pub fn finish_day(&mut self) {
        self.day += 1;
        self.capped_at_day_start = self.capped_rbp_cumsum;
    }
}
