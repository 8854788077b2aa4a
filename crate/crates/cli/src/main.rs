use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use axionkit_cli::config::{self, GainChoice, PresetChoice, RunConfig};
use axionkit_cli::{commands, output, CliError};

/// Regenerate axion-wind datasets: envelopes, daily RMS, spectra, triplet
/// statistics, line shapes and sensitivity curves.
#[derive(Parser)]
#[command(name = "axionkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON configuration file; omitted sections keep their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set geometry.latitude_deg=45`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed for all noise streams (same as `--set noise.seed=N`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (same as `--set output.directory=DIR`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Daily min/max and instantaneous |β|/β0 over a year.
    Envelope(Common),
    /// Geometry-only daily RMS against noisy Monte-Carlo realisations.
    DailyRms(Common),
    /// Baseband PSD with the sidereal/annual triplet marked.
    Psd(Common),
    /// Triplet powers and the annual depth estimate on synthetic or supplied data.
    Triplet {
        #[command(flatten)]
        common: Common,
        /// CSV (`t,value`) or binary series to analyse.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Sidereal phase ψ★ of the data, rad.
        #[arg(long)]
        psi_star: Option<f64>,
        /// Annual phase ψ⊕ of the data, rad.
        #[arg(long)]
        psi_earth: Option<f64>,
        /// Phase-agnostic Fourier powers; no phases required.
        #[arg(long)]
        agnostic: bool,
    },
    /// Standard-halo line shape for a list of masses.
    Linewidth(Common),
    /// Minimum detectable coupling curves and the DFSZ band.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// Qubit preset (same as `--set sensitivity.preset=...`).
        #[arg(long, value_enum)]
        preset: Option<PresetChoice>,
        /// Gain variant (same as `--set sensitivity.gains=...`).
        #[arg(long, value_enum)]
        gains: Option<GainChoice>,
    },
    /// Re-run a previous invocation from its manifest and compare outputs.
    Replay {
        /// manifest.json written by an earlier run.
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// Where to write the regenerated files (default: `<manifest dir>/replay`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Print the full default configuration as JSON.
    DefaultConfig,
}

fn key_help() -> String {
    format!(
        "Configuration keys (settable in the JSON file or with --set, defaults shown):\n{}",
        config::key_listing()
    )
}

fn quoted(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

fn execute(command: &str, common: &Common, extra: Vec<String>) -> Result<(), CliError> {
    let mut overrides = common.set.clone();
    overrides.extend(extra);
    if let Some(seed) = common.seed {
        overrides.push(format!("noise.seed={seed}"));
    }
    if let Some(dir) = &common.out {
        overrides.push(format!("output.directory={}", quoted(&dir.display().to_string())));
    }
    let cfg = config::load(common.config.as_deref(), &overrides)?;
    let (manifest, summary) = axionkit_cli::run_and_write(command, &cfg)?;
    for line in &summary {
        println!("{line}");
    }
    println!(
        "wrote {} file(s) and {} to {}",
        manifest.files.len(),
        output::MANIFEST,
        cfg.output.directory.display()
    );
    Ok(())
}

fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let report = axionkit_cli::replay(manifest_path, out)?;
    println!(
        "replayed `{}`: {} file(s) identical, written to {}",
        report.command,
        report.files,
        report.directory.display()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Envelope(c) => execute("envelope", &c, vec![]),
        Command::DailyRms(c) => execute("daily-rms", &c, vec![]),
        Command::Psd(c) => execute("psd", &c, vec![]),
        Command::Linewidth(c) => execute("linewidth", &c, vec![]),
        Command::Triplet { common, input, psi_star, psi_earth, agnostic } => {
            let mut extra = Vec::new();
            if let Some(p) = input {
                extra.push(format!("triplet.input={}", quoted(&p.display().to_string())));
            }
            if let Some(v) = psi_star {
                extra.push(format!("triplet.psi_star={v:e}"));
            }
            if let Some(v) = psi_earth {
                extra.push(format!("triplet.psi_annual={v:e}"));
            }
            if agnostic {
                extra.push("triplet.agnostic=true".into());
            }
            execute("triplet", &common, extra)
        }
        Command::Sensitivity { common, preset, gains } => {
            let mut extra = Vec::new();
            if let Some(p) = preset {
                extra.push(format!("sensitivity.preset={}", serde_json::to_string(&p).expect("enum")));
            }
            if let Some(g) = gains {
                extra.push(format!("sensitivity.gains={}", serde_json::to_string(&g).expect("enum")));
            }
            execute("sensitivity", &common, extra)
        }
        Command::Replay { manifest, out } => replay(&manifest, out.as_deref()),
        Command::DefaultConfig => {
            let text = serde_json::to_string_pretty(&RunConfig::default()).expect("defaults serialise");
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let help = key_help();
    let mut cmd = Cli::command();
    for name in commands::COMMANDS {
        cmd = cmd.mut_subcommand(name, |s| s.after_help(help.clone()));
    }
    let matches = cmd.get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("axionkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
