use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pnpvamp_cli::{resolve_config, resolve_out_dir, run_scenario, CliError, Scenario, ScenarioConfig};

/// Reproducible VAMP experiments driven by TOML config files.
#[derive(Parser, Debug)]
#[command(name = "pnpvamp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its CSV artifacts.
    Run {
        /// One of se-validate, image-recovery, cond-sweep, rate-sweep,
        /// csmu-sweep, selfcal-grid, gen-recursion-check.
        #[arg(long)]
        scenario: String,
        /// TOML config file; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory. Defaults to `$PNPVAMP_OUT/<scenario>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; the output does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and check a config file without running anything.
    ValidateConfig { file: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, config, out, seed, threads } => {
            let scenario = Scenario::parse(&scenario)?;
            let base = match &config {
                Some(path) => ScenarioConfig::load(path)?,
                None => ScenarioConfig::default(),
            };
            let config = resolve_config(base, scenario, seed)?;
            let dir = resolve_out_dir(out.as_deref(), &config, scenario);
            run_scenario(&config, scenario, &dir, threads)?;
            println!("{}: wrote {}", scenario.name(), dir.display());
            Ok(())
        }
        Command::ValidateConfig { file } => {
            let cfg = ScenarioConfig::load(&file)?;
            println!("{}: ok", file.display());
            if let Some(s) = cfg.scenario {
                println!("scenario = {}", s.name());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
