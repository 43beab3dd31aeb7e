//! `sensel`: runs configured sensor-selection experiments and writes their
//! CSV, JSON-lines and raster outputs.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sensel_core::experiment::{
    run_diag, run_dynamic_experiment, run_oracle_checks, run_static_sweep, write_oracle_rows,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "sensel",
    version,
    about = "Sensor selection and dynamic spectrum sensing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static selection sweep over methods, K and trials.
    Static(Common),
    /// Online reliability-aware selection over time blocks.
    Dynamic(Common),
    /// Spectral diagnostics of one scenario's gain matrix.
    Diag(Common),
    /// Exhaustive cross-checks of the selectors on small scenarios.
    Oracle(Common),
    /// Print the built-in default configuration as JSON.
    DefaultConfig,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; the built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials, overriding the configuration.
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Static(c) => {
            let cfg = c.load()?;
            let out = run_static_sweep(&cfg)?;
            report(&out.write(&cfg.output_dir)?);
        }
        Command::Dynamic(c) => {
            let cfg = c.load()?;
            let out = run_dynamic_experiment(&cfg)?;
            let files = out.write(&cfg.output_dir)?;
            eprintln!("wrote {} files", files.len());
            for row in &out.summary {
                println!(
                    "gamma={} post_transition_error={:.4} final_state_reliability={:.4}",
                    row.gamma, row.post_transition_error, row.final_state_reliability
                );
            }
        }
        Command::Diag(c) => {
            let cfg = c.load()?;
            report(&[run_diag(&cfg)?.write(&cfg.output_dir)?]);
        }
        Command::Oracle(c) => {
            let cfg = c.load()?;
            report(&[write_oracle_rows(
                &run_oracle_checks(&cfg)?,
                &cfg.output_dir,
            )?]);
        }
        Command::DefaultConfig => {
            let json = ExperimentConfig::default().to_json_pretty()?;
            match writeln!(std::io::stdout(), "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}
