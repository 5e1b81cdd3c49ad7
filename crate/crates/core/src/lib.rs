//! Deterministic, discrete-time agent-based simulator of a storage-network
//! token economy.
//!
//! Each simulated day storage-provider agents observe the network and a
//! forecast of it, decide how much power to onboard and renew, and the
//! aggregated decisions drive minting, locking, burning and the circulating
//! supply that the agents observe the next day.

pub mod agents;
pub mod cli;
pub mod backtest;
pub mod config;
pub mod engine;
pub mod experiments;
pub mod forecast;
pub mod io;
pub mod power;
pub mod supply;
pub mod units;

/// Day index counted from network genesis.
pub type Day = i64;
