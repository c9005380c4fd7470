//! Config-driven scenario runner around the `pnpvamp` library.
//!
//! A run resolves a [`ScenarioConfig`], executes the scenario's cells on a
//! rayon pool and writes `results.csv`, `se.csv` (when the scenario has a
//! state-evolution prediction), `timing.csv` and `meta.toml`.

pub mod config;
pub mod image;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

pub use config::{Scenario, ScenarioConfig};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "PNPVAMP_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

/// `--out`, then the config's `out_dir`, then `$PNPVAMP_OUT/<scenario>`,
/// then `pnpvamp-out/<scenario>`.
pub fn resolve_out_dir(flag: Option<&Path>, config: &ScenarioConfig, scenario: Scenario) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = &config.out_dir {
        return p.clone();
    }
    let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("pnpvamp-out"), PathBuf::from);
    root.join(scenario.name())
}

/// Applies command-line overrides and checks the scenario named on the
/// command line against the one in the file.
pub fn resolve_config(mut config: ScenarioConfig, scenario: Scenario, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    match config.scenario {
        Some(s) if s != scenario => {
            return Err(CliError::Config(format!(
                "config is for `{}` but `{}` was requested",
                s.name(),
                scenario.name()
            )))
        }
        _ => config.scenario = Some(scenario),
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one scenario end to end and writes its artifacts to `out`.
pub fn run_scenario(config: &ScenarioConfig, scenario: Scenario, out: &Path, threads: Option<usize>) -> Result<(), CliError> {
    let artifacts = scenarios::run(config, scenario, threads)?;
    artifacts.write(out, scenario, config)
}
