//! Network power forecasting and the rewards-per-sector series agents use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::supply::{SupplyError, SupplyParams, SupplyState};
use crate::units::{Bytes, GIB};
use crate::Day;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("need at least 2 points inside the fit window, got {0}")]
    NotEnoughPoints(usize),
    #[error("forecast QAP must be positive, got {value} at offset {offset}")]
    NonPositiveQap { offset: usize, value: f64 },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Supply(#[from] SupplyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSettings {
    /// Trailing window of the least-squares fit.
    pub window_days: u32,
    /// Lower bound applied to forecast power.
    pub floor_bytes: Bytes,
    pub sector_size: Bytes,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        Self {
            window_days: 90,
            floor_bytes: Bytes(GIB),
            sector_size: Bytes(32.0 * GIB),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn value_at(&self, day: Day) -> f64 {
        self.intercept + self.slope * day as f64
    }

    /// Values for `start_day .. start_day + horizon`, floored at `floor`.
    pub fn forecast(&self, start_day: Day, horizon: usize, floor: f64) -> Vec<f64> {
        (0..horizon)
            .map(|k| self.value_at(start_day + k as Day).max(floor))
            .collect()
    }
}

/// Ordinary least squares over the points whose day falls within the last
/// `window` days of the history.
pub fn fit_linear(history: &[(Day, f64)], window: u32) -> Result<LinearFit, ForecastError> {
    let Some(&(last_day, _)) = history.last() else {
        return Err(ForecastError::NotEnoughPoints(0));
    };
    let first_day = last_day - Day::from(window) + 1;
    let points: Vec<(f64, f64)> = history
        .iter()
        .filter(|(d, _)| *d >= first_day)
        .map(|&(d, v)| (d as f64, v))
        .collect();
    if points.len() < 2 {
        return Err(ForecastError::NotEnoughPoints(points.len()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in &points {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    if sxx == 0.0 {
        return Err(ForecastError::NotEnoughPoints(1));
    }
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: mean_y - slope * mean_x })
}

/// A model that extrapolates a daily power series.
///
/// Only linear extrapolation ships; sampling-based forecasters or
/// agent-specific models plug in here.
pub trait Forecaster {
    /// Forecast values for `start_day .. start_day + horizon`. `fallback` is
    /// used when the history is too short to fit.
    fn forecast(&self, history: &[(Day, f64)], start_day: Day, horizon: usize, fallback: f64) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearExtrapolation {
    pub window_days: u32,
    pub floor: f64,
}

impl From<&ForecastSettings> for LinearExtrapolation {
    fn from(s: &ForecastSettings) -> Self {
        Self { window_days: s.window_days, floor: s.floor_bytes.0 }
    }
}

impl Forecaster for LinearExtrapolation {
    fn forecast(&self, history: &[(Day, f64)], start_day: Day, horizon: usize, fallback: f64) -> Vec<f64> {
        match fit_linear(history, self.window_days) {
            Ok(fit) => fit.forecast(start_day, horizon, self.floor),
            Err(_) => {
                let level = history.last().map_or(fallback, |p| p.1).max(self.floor);
                vec![level; horizon]
            }
        }
    }
}

/// Minting increments along a forecast raw-byte power path starting at the
/// state's current day.
pub fn expected_minting_rate(
    rbp_hat: &[f64],
    state: &SupplyState,
    params: &SupplyParams,
) -> Result<Vec<f64>, ForecastError> {
    let mut capped = state.capped_rbp_cumsum;
    let mut prev = if state.day == 0 {
        params.baseline_minting_cumulative(capped)?
    } else {
        params.minted_cumulative((state.day - 1) as f64, capped)?
    };
    let mut out = Vec::with_capacity(rbp_hat.len());
    for (k, &rbp) in rbp_hat.iter().enumerate() {
        let d = (state.day + k as Day) as f64;
        capped += params.baseline_function(d)?.min(rbp.max(0.0));
        let minted = params.minted_cumulative(d, capped)?;
        out.push((minted - prev).max(0.0));
        prev = minted;
    }
    Ok(out)
}

/// Expected daily reward of one sector: `m[t] * sector_size * quality / qap[t]`.
pub fn rewards_per_sector(
    minting_rate_hat: &[f64],
    qap_hat: &[f64],
    sector_size: f64,
    sector_quality: f64,
) -> Result<Vec<f64>, ForecastError> {
    if minting_rate_hat.len() != qap_hat.len() {
        return Err(ForecastError::LengthMismatch(minting_rate_hat.len(), qap_hat.len()));
    }
    let sector_qa = sector_size * sector_quality;
    minting_rate_hat
        .iter()
        .zip(qap_hat)
        .enumerate()
        .map(|(offset, (&m, &q))| {
            if q > 0.0 {
                Ok(m * sector_qa / q)
            } else {
                Err(ForecastError::NonPositiveQap { offset, value: q })
            }
        })
        .collect()
}

/// One day's forecast snapshot shared with every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerForecast {
    pub start_day: Day,
    pub horizon: usize,
    pub rbp_hat: Vec<f64>,
    pub qap_hat: Vec<f64>,
    pub minting_rate_hat: Vec<f64>,
    pub sector_size: f64,
    /// Expected reward of a quality-1 sector per day.
    pub rewards_per_sector: Vec<f64>,
}

impl PowerForecast {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        forecaster: &dyn Forecaster,
        rbp_history: &[(Day, f64)],
        qap_history: &[(Day, f64)],
        current: (f64, f64),
        state: &SupplyState,
        params: &SupplyParams,
        settings: &ForecastSettings,
        horizon: usize,
    ) -> Result<Self, ForecastError> {
        let start_day = state.day;
        let rbp_hat = forecaster.forecast(rbp_history, start_day, horizon, current.0);
        let qap_hat = forecaster.forecast(qap_history, start_day, horizon, current.1);
        let minting_rate_hat = expected_minting_rate(&rbp_hat, state, params)?;
        let rewards = rewards_per_sector(&minting_rate_hat, &qap_hat, settings.sector_size.0, 1.0)?;
        Ok(Self {
            start_day,
            horizon,
            rbp_hat,
            qap_hat,
            minting_rate_hat,
            sector_size: settings.sector_size.0,
            rewards_per_sector: rewards,
        })
    }

    /// Rewards-per-sector series for a sector of the given quality multiplier.
    pub fn rewards_for_quality(&self, quality: f64) -> Vec<f64> {
        self.rewards_per_sector.iter().map(|r| r * quality).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::EIB;

    #[test]
    fn fit_exact_line() {
        let fit = fit_linear(&[(0, 1.0), (1, 2.0)], 90).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-15 && (fit.intercept - 1.0).abs() < 1e-15);
        let fit = fit_linear(&[(0, 4.0), (1, 4.0), (2, 4.0)], 90).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!(matches!(fit_linear(&[(0, 1.0)], 90), Err(ForecastError::NotEnoughPoints(1))));
        assert!(fit_linear(&[], 90).is_err());
    }

    #[test]
    fn fit_respects_window() {
        let line = [(0, 0.0), (1, 1.0), (2, 2.0), (3, 3.0)];
        let full = fit_linear(&line, 90).unwrap();
        let windowed = fit_linear(&line, 2).unwrap();
        assert!((full.slope - windowed.slope).abs() < 1e-12);
        // perturbing points outside the window leaves the fit unchanged
        let perturbed = [(0, 50.0), (1, -7.0), (2, 2.0), (3, 3.0)];
        assert_eq!(fit_linear(&perturbed, 2).unwrap(), windowed);
        assert_ne!(fit_linear(&perturbed, 90).unwrap(), windowed);
        // only one point inside the window
        assert!(fit_linear(&line, 1).is_err());
    }

    #[test]
    fn forecast_line_and_floor() {
        let fit = LinearFit { slope: 1.0, intercept: 1.0 };
        assert_eq!(fit.forecast(5, 3, 0.5), vec![6.0, 7.0, 8.0]);
        let falling = LinearFit { slope: -2.0, intercept: 5.0 };
        let values = falling.forecast(0, 6, 0.25);
        assert!(values.iter().all(|&v| v > 0.0));
        assert_eq!(values[5], 0.25);
        let flat = LinearFit { slope: 0.0, intercept: 3.0 };
        assert_eq!(flat.forecast(100, 3, 0.1), vec![3.0; 3]);
    }

    #[test]
    fn linear_forecaster_falls_back_on_short_history() {
        let f = LinearExtrapolation { window_days: 90, floor: 1.0 };
        assert_eq!(f.forecast(&[], 0, 2, 7.0), vec![7.0, 7.0]);
        assert_eq!(f.forecast(&[(3, 9.0)], 4, 1, 7.0), vec![9.0]);
        assert_eq!(f.forecast(&[], 0, 1, 0.0), vec![1.0]);
    }

    #[test]
    fn minting_rate_without_power_is_simple_only() {
        let p = SupplyParams::default();
        let state = SupplyState::new(&p, 10).unwrap();
        let m = expected_minting_rate(&[0.0; 5], &state, &p).unwrap();
        for (k, v) in m.iter().enumerate() {
            let d = 10.0 + k as f64;
            let simple = p.simple_minting_cumulative(d).unwrap() - p.simple_minting_cumulative(d - 1.0).unwrap();
            assert!((v - simple).abs() <= 1e-9 * simple);
        }
    }

    #[test]
    fn rewards_per_sector_examples() {
        let m = [1e5];
        let q = [10.0 * EIB];
        let cc = rewards_per_sector(&m, &q, 32.0 * GIB, 1.0).unwrap()[0];
        assert!(((cc - 1e4 * 2f64.powi(-25)) / cc).abs() < 1e-12);
        let fp = rewards_per_sector(&m, &q, 32.0 * GIB, 10.0).unwrap()[0];
        assert!(((fp - 10.0 * cc) / fp).abs() < 1e-15);
        let half = rewards_per_sector(&m, &[20.0 * EIB], 32.0 * GIB, 1.0).unwrap()[0];
        assert!(((half - cc / 2.0) / half).abs() < 1e-15);
        assert!(rewards_per_sector(&m, &[0.0], 32.0 * GIB, 1.0).is_err());
    }
}
