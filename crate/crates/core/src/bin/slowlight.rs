use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slowlight_core::error::Result;
use slowlight_core::scenario::sweep::rates_for;
use slowlight_core::scenario::{emit_table, preset, run_sweep, Format, ScenarioConfig};
use slowlight_core::units::omega0;

/// Slow-light observables of a driven quantum-dot ladder with non-Markovian
/// dephasing.
#[derive(Parser)]
#[command(name = "slowlight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file on its sweep grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override a dotted key, e.g. `--set drive.omega_p="4 Omega0"`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file (standard output when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run, or print, the scenario of a figure preset.
    Preset {
        #[arg(long)]
        name: String,
        /// Print the scenario as TOML instead of running it.
        #[arg(long)]
        emit_config: bool,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rates at the configured operating point.
    Rates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn sweep_and_emit(config: &ScenarioConfig, format: &str, out: Option<&PathBuf>) -> Result<()> {
    let format: Format = format.parse()?;
    if let Some(warning) = config.drive.to_drive().weak_signal_warning() {
        eprintln!("warning: {warning}");
    }
    let result = run_sweep(config)?;
    eprintln!(
        "slowlight {} config sha256 {}",
        result.metadata.version, result.metadata.config_hash
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    emit_table(&result, format, out.map(|p| p.as_path()))
}

fn print_rates(config: &ScenarioConfig) -> Result<()> {
    let drive = config.drive.to_drive();
    let w0 = omega0();
    println!("branch,gamma2_re,gamma2_im,gamma3_re,gamma3_im,nu2_re,nu2_im,nu3_re,nu3_im,delta_s,delta_p");
    for b in config.resolve()? {
        let r = rates_for(&b.model, &drive, None)?;
        let values = [
            r.gamma2.re, r.gamma2.im, r.gamma3.re, r.gamma3.im, r.nu2.re, r.nu2.im, r.nu3.re, r.nu3.im, r.delta_s,
            r.delta_p,
        ];
        let fields: Vec<String> = values
            .iter()
            .map(|v| slowlight_core::scenario::emit::format_value(v / w0))
            .collect();
        println!("{},{}", b.name.unwrap_or_default(), fields.join(","));
    }
    eprintln!("(rates and detunings in units of Omega0)");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            set,
            format,
            out,
        } => {
            let config = ScenarioConfig::from_file(&config, &set)?;
            sweep_and_emit(&config, &format, out.as_ref())
        }
        Command::Preset {
            name,
            emit_config,
            format,
            out,
        } => {
            let config = preset(&name)?;
            if emit_config {
                let text = config.to_toml_string();
                match out {
                    Some(path) => std::fs::write(path, text)?,
                    None => print!("{text}"),
                }
                Ok(())
            } else {
                sweep_and_emit(&config, &format, out.as_ref())
            }
        }
        Command::Rates { config, set } => print_rates(&ScenarioConfig::from_file(&config, &set)?),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
