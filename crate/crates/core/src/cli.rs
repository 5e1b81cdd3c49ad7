//! Command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 model breakdown
//! during a run, 3 backtest error above the threshold.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use crate::backtest::backtest;
use crate::config::load_config;
use crate::engine::run;
use crate::experiments::{
    run_all, run_experiment, sweep_configs, sweep_dir_name, sweep_rows, write_sweep_comparison, ExperimentName,
    ExperimentOptions,
};
use crate::io::{load_historical, synthesize_history, write_historical, write_trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fil-abm", version, about = "Agent-based simulator of a storage-network token economy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay recorded power and compare modeled with recorded supply.
    Backtest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        historical: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `backtest.max_rel_error` from the config.
        #[arg(long)]
        max_rel_error: Option<f64>,
    },
    /// Run one simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation per value of a config parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted config path, e.g. `external_rate.rate` or `agents.fofr_threshold`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a canned experiment.
    Experiment {
        /// rate_sensitivity, rate_sensitivity_riskaverse or wealth_concentration.
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// `key=value` overrides: `horizon_days`, `rates`, or any config path.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Run a config and write its network series as a historical CSV.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

type Outcome = Result<i32, (i32, String)>;

fn invalid(e: impl std::fmt::Display) -> (i32, String) {
    (EXIT_INVALID, e.to_string())
}

fn breakdown_or_invalid(is_breakdown: bool, e: impl std::fmt::Display) -> (i32, String) {
    (if is_breakdown { EXIT_BREAKDOWN } else { EXIT_INVALID }, e.to_string())
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Backtest { config, historical, out, max_rel_error } => {
            cmd_backtest(&config, &historical, &out, max_rel_error)
        }
        Command::Sweep { config, param, values, out } => cmd_sweep(&config, &param, &values, &out),
        Command::Experiment { name, out, sets } => cmd_experiment(&name, &sets, &out),
        Command::Synthesize { config, out } => cmd_synthesize(&config, &out),
    }
}

fn cmd_run(config_path: &Path, out: &Path) -> Outcome {
    let config = load_config(config_path).map_err(invalid)?;
    let trajectory = run(&config).map_err(|e| breakdown_or_invalid(e.is_model_breakdown(), e))?;
    let files = write_trajectory(&trajectory, &config, out).map_err(invalid)?;
    for w in &trajectory.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} days to {}", trajectory.len(), files.network_csv.parent().unwrap_or(out).display());
    Ok(EXIT_OK)
}

fn cmd_backtest(config_path: &Path, historical: &Path, out: &Path, max_rel_error: Option<f64>) -> Outcome {
    let mut config = load_config(config_path).map_err(invalid)?;
    if let Some(x) = max_rel_error {
        if !(x.is_finite() && x >= 0.0) {
            return Err(invalid(format!("--max-rel-error must be non-negative, got {x}")));
        }
        config.backtest.max_rel_error = x;
    }
    let data = load_historical(historical).map_err(|e| invalid(format!("{}: {e}", historical.display())))?;
    let (trajectory, report) = backtest(&config, &data).map_err(|e| breakdown_or_invalid(e.is_model_breakdown(), e))?;
    write_trajectory(&trajectory, &config, out).map_err(invalid)?;
    report.write(out).map_err(invalid)?;
    for w in &trajectory.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "minted: max rel error {:.3e} (mean {:.3e}); circulating: max rel error {:.3e} (mean {:.3e}); threshold {}",
        report.minted.max, report.minted.mean, report.circulating.max, report.circulating.mean, report.threshold
    );
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: max relative error {:.6e} exceeds threshold {}", report.max_rel_error(), report.threshold);
        Ok(EXIT_THRESHOLD)
    }
}

fn cmd_sweep(config_path: &Path, param: &str, values: &[String], out: &Path) -> Outcome {
    let base = load_config(config_path).map_err(invalid)?;
    let values: Vec<String> = values.iter().map(|v| v.trim().to_string()).collect();
    let configs = sweep_configs(&base, param, &values).map_err(invalid)?;
    let results = run_all(&configs);
    std::fs::create_dir_all(out).map_err(|e| invalid(format!("{}: {e}", out.display())))?;
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for (i, ((value, config), result)) in values.iter().zip(&configs).zip(results).enumerate() {
        match result {
            Ok(t) => {
                write_trajectory(&t, config, &out.join(sweep_dir_name(i, value))).map_err(invalid)?;
                rows.extend(sweep_rows(value, &t));
            }
            Err(e) => {
                eprintln!("error: {param}={value}: {e}");
                let c = if e.is_model_breakdown() { EXIT_BREAKDOWN } else { EXIT_INVALID };
                code = code.max(c);
            }
        }
    }
    write_sweep_comparison(&out.join("comparison.csv"), rows).map_err(invalid)?;
    println!("swept {param} over {} values into {}", values.len(), out.display());
    Ok(code)
}

fn cmd_experiment(name: &str, sets: &[String], out: &Path) -> Outcome {
    let name: ExperimentName = name.parse().map_err(invalid)?;
    let opts = ExperimentOptions::defaults_for(name).with_sets(sets).map_err(invalid)?;
    let output = run_experiment(name, &opts, out).map_err(|e| breakdown_or_invalid(e.is_model_breakdown(), e))?;
    if let Some(r) = &output.rate {
        for (i, rate) in r.rates.iter().enumerate() {
            println!(
                "rate {rate}: FIL+ net {:.6e}, CC net {:.6e}, FIL+ >= CC after warm-up: {}",
                r.filplus_final_net[i], r.cc_final_net[i], r.filplus_ge_cc[i]
            );
        }
        println!(
            "net rewards non-increasing in rate: FIL+ {}, CC {}",
            r.filplus_nonincreasing_in_rate, r.cc_nonincreasing_in_rate
        );
    }
    if let Some(r) = &output.wealth {
        for (i, s) in r.scenarios.iter().enumerate() {
            println!(
                "{s}: relative rewards non-increasing {}, max power deviation {:.3e}",
                r.relative_rewards_nonincreasing[i], r.max_power_deviation[i]
            );
        }
    }
    println!("wrote {} to {}", name, out.display());
    Ok(EXIT_OK)
}

fn cmd_synthesize(config_path: &Path, out: &Path) -> Outcome {
    let config = load_config(config_path).map_err(invalid)?;
    let genesis = NaiveDate::parse_from_str(&config.backtest.genesis_date, "%Y-%m-%d").map_err(invalid)?;
    let duration = config.backtest.sector_duration;
    if config.agents.iter().any(|a| a.candidate_durations.iter().any(|&d| d != duration)) {
        eprintln!(
            "warning: some agents commit for durations other than backtest.sector_duration ({duration}); \
             a replay of this history will not match exactly"
        );
    }
    let trajectory = run(&config).map_err(|e| breakdown_or_invalid(e.is_model_breakdown(), e))?;
    let data = synthesize_history(&trajectory, genesis);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| invalid(format!("{}: {e}", parent.display())))?;
    }
    write_historical(&data, out).map_err(invalid)?;
    println!("wrote {} rows to {}", data.len(), out.display());
    Ok(EXIT_OK)
}
