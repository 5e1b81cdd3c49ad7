//! Network power ledger.
//!
//! Power is tracked as aggregate tranches per owner and kind rather than as
//! individual sectors. Quality-adjusted power is always derived from the
//! raw-byte totals, so `qap = rbp_cc + 10 * rbp_deal` holds exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Day;

/// Quality multiplier of verified-deal power.
pub const FIL_PLUS_MULTIPLIER: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerKind {
    Cc,
    FilPlus,
}

impl PowerKind {
    pub fn multiplier(self) -> f64 {
        match self {
            PowerKind::Cc => 1.0,
            PowerKind::FilPlus => FIL_PLUS_MULTIPLIER,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("{what} must be non-negative and finite, got {value}")]
    InvalidAmount { what: &'static str, value: f64 },
    #[error("FIL+ fraction must be in [0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("duration must be at least one day")]
    InvalidDuration,
    #[error("tranche for {owner} must expire after day {day}, expiry {expiry_day}")]
    InvalidTranche { owner: AgentId, day: Day, expiry_day: Day },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTranche {
    pub owner: AgentId,
    pub rb_amount: f64,
    pub kind: PowerKind,
    pub onboard_day: Day,
    pub expiry_day: Day,
}

impl PowerTranche {
    pub fn qa_amount(&self) -> f64 {
        self.rb_amount * self.kind.multiplier()
    }
}

/// Raw-byte power split by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct KindSplit {
    pub cc: f64,
    pub deal: f64,
}

impl KindSplit {
    pub fn qap(&self) -> f64 {
        quality_adjusted_power(self.cc, self.deal)
    }

    pub fn rbp(&self) -> f64 {
        self.cc + self.deal
    }

    fn add(&mut self, kind: PowerKind, amount: f64) {
        match kind {
            PowerKind::Cc => self.cc += amount,
            PowerKind::FilPlus => self.deal += amount,
        }
    }

    fn sub(&mut self, kind: PowerKind, amount: f64) {
        let slot = match kind {
            PowerKind::Cc => &mut self.cc,
            PowerKind::FilPlus => &mut self.deal,
        };
        *slot = (*slot - amount).max(0.0);
    }
}

/// `rbp_cc + 10 rbp_deal`, i.e. `(1 - gamma) P + 10 gamma P` with
/// `gamma = rbp_deal / (rbp_cc + rbp_deal)`.
pub fn quality_adjusted_power(rbp_cc: f64, rbp_deal: f64) -> f64 {
    rbp_cc + FIL_PLUS_MULTIPLIER * rbp_deal
}

/// Result of a renewal request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renewal {
    pub renewed_rb: f64,
    pub delta_qap: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct NetworkPower {
    pub day: Day,
    pub rbp_cc: f64,
    pub rbp_deal: f64,
    /// Active tranches keyed by expiry day.
    pub active_tranches: BTreeMap<Day, Vec<PowerTranche>>,
    pub per_agent: BTreeMap<AgentId, KindSplit>,
    /// Power that expired at the start of the current day and has not been
    /// renewed yet.
    pub expiring_today: BTreeMap<AgentId, KindSplit>,
    pub warnings: Vec<String>,
}

fn check_amount(what: &'static str, value: f64) -> Result<(), PowerError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(PowerError::InvalidAmount { what, value })
    }
}

impl NetworkPower {
    pub fn new(day: Day) -> Self {
        Self { day, ..Default::default() }
    }

    pub fn qap(&self) -> f64 {
        quality_adjusted_power(self.rbp_cc, self.rbp_deal)
    }

    pub fn rbp(&self) -> f64 {
        self.rbp_cc + self.rbp_deal
    }

    pub fn agent_qap(&self, agent: &AgentId) -> f64 {
        self.per_agent.get(agent).map_or(0.0, KindSplit::qap)
    }

    pub fn per_agent_qap(&self) -> BTreeMap<AgentId, f64> {
        self.per_agent.iter().map(|(a, s)| (a.clone(), s.qap())).collect()
    }

    /// CC power of `agent` that expired today and is still renewable.
    pub fn expiring_cc(&self, agent: &AgentId) -> f64 {
        self.expiring_today.get(agent).map_or(0.0, |s| s.cc)
    }

    /// Insert an existing tranche, e.g. from an initial network snapshot.
    pub fn add_tranche(&mut self, tranche: PowerTranche) -> Result<f64, PowerError> {
        check_amount("rb_amount", tranche.rb_amount)?;
        if tranche.expiry_day <= self.day {
            return Err(PowerError::InvalidTranche {
                owner: tranche.owner,
                day: self.day,
                expiry_day: tranche.expiry_day,
            });
        }
        if tranche.rb_amount == 0.0 {
            return Ok(0.0);
        }
        let qa = tranche.qa_amount();
        match tranche.kind {
            PowerKind::Cc => self.rbp_cc += tranche.rb_amount,
            PowerKind::FilPlus => self.rbp_deal += tranche.rb_amount,
        }
        self.per_agent
            .entry(tranche.owner.clone())
            .or_default()
            .add(tranche.kind, tranche.rb_amount);
        self.active_tranches.entry(tranche.expiry_day).or_default().push(tranche);
        Ok(qa)
    }

    /// Onboard `rb_amount` bytes, `fil_plus_fraction` of which are verified
    /// deals, committed for `duration` days. Returns the QAP increment.
    pub fn onboard(
        &mut self,
        owner: &AgentId,
        rb_amount: f64,
        fil_plus_fraction: f64,
        duration: u32,
    ) -> Result<f64, PowerError> {
        check_amount("rb_amount", rb_amount)?;
        if !(0.0..=1.0).contains(&fil_plus_fraction) {
            return Err(PowerError::InvalidFraction(fil_plus_fraction));
        }
        if duration < 1 {
            return Err(PowerError::InvalidDuration);
        }
        if rb_amount == 0.0 {
            return Ok(0.0);
        }
        let expiry_day = self.day + Day::from(duration);
        let deal = rb_amount * fil_plus_fraction;
        let cc = rb_amount - deal;
        let mut delta_qap = 0.0;
        for (kind, amount) in [(PowerKind::Cc, cc), (PowerKind::FilPlus, deal)] {
            if amount > 0.0 {
                delta_qap += self.add_tranche(PowerTranche {
                    owner: owner.clone(),
                    rb_amount: amount,
                    kind,
                    onboard_day: self.day,
                    expiry_day,
                })?;
            }
        }
        Ok(delta_qap)
    }

    /// Recommit CC power that expired today for another `duration` days.
    /// Requests above the renewable amount are clamped and a warning is
    /// recorded.
    pub fn renew(&mut self, owner: &AgentId, rb_amount: f64, duration: u32) -> Result<Renewal, PowerError> {
        check_amount("rb_amount", rb_amount)?;
        if duration < 1 {
            return Err(PowerError::InvalidDuration);
        }
        if rb_amount == 0.0 {
            return Ok(Renewal { renewed_rb: 0.0, delta_qap: 0.0 });
        }
        let available = self.expiring_cc(owner);
        let renewed_rb = if rb_amount > available {
            // tolerate rounding noise silently
            if rb_amount > available * (1.0 + 1e-9) {
                self.warnings.push(format!(
                    "day {}: {owner} requested renewal of {rb_amount} B but only {available} B of CC expired; clamped",
                    self.day
                ));
            }
            available
        } else {
            rb_amount
        };
        if renewed_rb == 0.0 {
            return Ok(Renewal { renewed_rb: 0.0, delta_qap: 0.0 });
        }
        if let Some(split) = self.expiring_today.get_mut(owner) {
            split.cc = (split.cc - renewed_rb).max(0.0);
        }
        let delta_qap = self.add_tranche(PowerTranche {
            owner: owner.clone(),
            rb_amount: renewed_rb,
            kind: PowerKind::Cc,
            onboard_day: self.day,
            expiry_day: self.day + Day::from(duration),
        })?;
        Ok(Renewal { renewed_rb, delta_qap })
    }

    /// Remove every tranche expiring on or before `day` and make `day` the
    /// current day. Returns the expired power per owner.
    pub fn expire_step(&mut self, day: Day) -> BTreeMap<AgentId, KindSplit> {
        self.day = day;
        self.expiring_today.clear();
        let still_active = self.active_tranches.split_off(&(day + 1));
        let expired = std::mem::replace(&mut self.active_tranches, still_active);
        for tranche in expired.into_values().flatten() {
            self.remove_power(&tranche.owner, tranche.kind, tranche.rb_amount);
            self.expiring_today
                .entry(tranche.owner)
                .or_default()
                .add(tranche.kind, tranche.rb_amount);
        }
        self.expiring_today.clone()
    }

    /// Terminate up to `rb_amount` of `owner`'s CC power, earliest expiry
    /// first. Returns the raw bytes actually removed.
    pub fn terminate(&mut self, owner: &AgentId, rb_amount: f64) -> Result<f64, PowerError> {
        check_amount("rb_amount", rb_amount)?;
        let mut remaining = rb_amount;
        for tranches in self.active_tranches.values_mut() {
            for t in tranches.iter_mut().filter(|t| &t.owner == owner && t.kind == PowerKind::Cc) {
                if remaining <= 0.0 {
                    break;
                }
                let take = t.rb_amount.min(remaining);
                t.rb_amount -= take;
                remaining -= take;
            }
            tranches.retain(|t| t.rb_amount > 0.0);
        }
        self.active_tranches.retain(|_, v| !v.is_empty());
        let removed = rb_amount - remaining;
        if removed > 0.0 {
            self.remove_power(owner, PowerKind::Cc, removed);
        }
        Ok(removed)
    }

    fn remove_power(&mut self, owner: &AgentId, kind: PowerKind, amount: f64) {
        let total = match kind {
            PowerKind::Cc => &mut self.rbp_cc,
            PowerKind::FilPlus => &mut self.rbp_deal,
        };
        *total = (*total - amount).max(0.0);
        if let Some(split) = self.per_agent.get_mut(owner) {
            split.sub(kind, amount);
        }
        if self.active_tranches.is_empty() {
            self.rbp_cc = 0.0;
            self.rbp_deal = 0.0;
            for split in self.per_agent.values_mut() {
                *split = KindSplit::default();
            }
        }
    }
}
