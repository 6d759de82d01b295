use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bdma_core::harness::{
    run_linksim_sweep, run_prop_suite, run_schedule, run_spreads, run_sumrate_sweep, ExperimentResult, Preset,
    ScenarioConfig,
};
use clap::{Args, Parser, Subcommand};

/// Beam-domain massive MIMO simulator: statistical property checks, per-beam
/// synchronization spreads, BDMA scheduling and link-level simulation.
#[derive(Debug, Parser)]
#[command(name = "bdma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Statistical checks of the beam-domain channel and offset bounds.
    VerifyProps(Common),
    /// Delay and Doppler spreads for joint and per-beam synchronization.
    Spreads(Common),
    /// Greedy beam scheduling; writes the assignments and their rates.
    Schedule(Common),
    /// Greedy sum rate against the interference-free benchmark over the SNR grid.
    Sumrate(Common),
    /// Link-level OFDM simulation of joint vs per-beam synchronization.
    Linksim(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML scenario file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario used when no file is given.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// Master seed, overrides the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Config override `key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn scenario(&self) -> anyhow::Result<ScenarioConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            None => format!("preset = \"{}\"", Preset::from_name(&self.preset)?.name()),
        };
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("master_seed={seed}"));
        }
        Ok(ScenarioConfig::from_toml_with_overrides(&text, &overrides)?)
    }
}

fn report(result: &ExperimentResult, out: &Path, config: &ScenarioConfig) -> anyhow::Result<bool> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.toml"), config.to_toml_string()?)?;
    let files = result.write(out)?;
    println!("{} config_hash={} seed={}", result.experiment, result.config_hash, result.seed);
    for c in &result.checks {
        println!(
            "  {:<4} {} (measured {:.6e}, threshold {:.6e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        );
    }
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(result.all_passed())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (common, runner): (&Common, fn(&ScenarioConfig) -> bdma_core::Result<ExperimentResult>) = match &cli.command {
        Command::VerifyProps(c) => (c, run_prop_suite),
        Command::Spreads(c) => (c, run_spreads),
        Command::Schedule(c) => (c, run_schedule),
        Command::Sumrate(c) => (c, run_sumrate_sweep),
        Command::Linksim(c) => (c, run_linksim_sweep),
    };
    let config = common.scenario()?;
    let result = runner(&config)?;
    report(&result, &common.out, &config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
