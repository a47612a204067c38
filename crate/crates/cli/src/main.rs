use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use floquet_cli::{load, presets, run, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "floquet", version, about = "Run Floquet sideband experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or bundled preset.
    Run {
        config: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Check a config and print its canonical form.
    Validate { config: String },
    /// List the bundled presets.
    ListPresets,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, output, seed, threads } => {
            let (parsed, base) = load(&config)?;
            for w in &parsed.warnings {
                log::warn!("{w}");
            }
            let mut cfg = parsed.config;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let output = output.unwrap_or_else(|| floquet_cli::run::default_output(&cfg, base.as_deref()));
            let summary = run(&cfg, &RunOptions { output, threads })?;
            for f in &summary.manifest.files {
                println!("{}\t{} rows", summary.output.join(&f.name).display(), f.rows);
            }
            println!("{}", summary.output.join("manifest.json").display());
            Ok(())
        }
        Command::Validate { config } => {
            let (parsed, _) = load(&config)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", parsed.config.to_canonical_string());
            Ok(())
        }
        Command::ListPresets => {
            for name in presets::names() {
                println!("{name:<10} {}", presets::description(presets::preset(name).unwrap_or_default()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
