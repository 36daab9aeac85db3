use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use piezobeam_cli::{
    cmd_calibrate, cmd_compare, cmd_fem_report, cmd_freq, cmd_sweep, Options, Report, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "piezobeam",
    version,
    about = "Resonance analysis of a two-layer piezoelectric beam"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write the CSV table here instead of stdout (overrides output.csv)
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
    /// Write the JSON report here (overrides output.json)
    #[arg(long, value_name = "PATH")]
    out_json: Option<PathBuf>,
    /// Report angular frequencies in rad/s instead of Hz
    #[arg(long)]
    rad_s: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, sixth-order and (optionally) FEM frequencies per mode
    Freq(Common),
    /// Error percentages of model frequencies against reference values
    Compare {
        #[command(flatten)]
        common: Common,
        /// Reference frequencies in Hz, comma separated (overrides compare.reference_hz)
        #[arg(long, value_delimiter = ',', value_name = "HZ,...")]
        reference: Option<Vec<f64>>,
    },
    /// First-mode frequency over the thickness-ratio grid, analytic vs FEM
    Sweep(Common),
    /// Span length that puts a mode at a target frequency
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Target frequency in Hz (overrides length.calibrate)
        #[arg(long, value_name = "HZ")]
        target_hz: Option<f64>,
        /// Mode number to calibrate
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Mesh convergence table of the FEM oracle
    FemReport {
        #[command(flatten)]
        common: Common,
        /// Mesh sequence, comma separated (overrides fem.meshes)
        #[arg(long, value_delimiter = ',', value_name = "N,...")]
        meshes: Option<Vec<usize>>,
        /// Number of modes per mesh, axial modes included
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Write K and M of the finest mesh as row/col/value triplets
        #[arg(long, value_name = "PATH")]
        dump_matrices: Option<PathBuf>,
    },
}

fn resolve_output(
    flag: Option<&PathBuf>,
    configured: Option<&PathBuf>,
    base: Option<&Path>,
) -> Option<PathBuf> {
    flag.cloned().or_else(|| {
        configured.map(|p| match base {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.clone(),
        })
    })
}

fn emit(report: &Report, common: &Common, config: &RunConfig) -> Result<()> {
    let base = config.base_dir.as_deref();
    match resolve_output(common.out_csv.as_ref(), config.output.csv.as_ref(), base) {
        Some(path) => fs::write(&path, report.table.to_csv_string())
            .with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout()
            .lock()
            .write_all(report.table.to_csv_string().as_bytes())?,
    }
    if let Some(path) = resolve_output(common.out_json.as_ref(), config.output.json.as_ref(), base)
    {
        fs::write(&path, &report.json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Freq(c) | Command::Sweep(c) => c,
        Command::Compare { common, .. }
        | Command::Calibrate { common, .. }
        | Command::FemReport { common, .. } => common,
    };
    let config = RunConfig::load(&common.config)?;
    let opts = Options {
        rad_per_s: common.rad_s,
    };
    let report = match &cli.command {
        Command::Freq(_) => cmd_freq(&config, opts)?,
        Command::Compare { reference, .. } => cmd_compare(&config, reference.as_deref(), opts)?,
        Command::Sweep(_) => cmd_sweep(&config, opts)?,
        Command::Calibrate {
            target_hz, mode, ..
        } => cmd_calibrate(&config, *target_hz, *mode, opts)?,
        Command::FemReport {
            meshes,
            count,
            dump_matrices,
            ..
        } => cmd_fem_report(
            &config,
            meshes.as_deref(),
            *count,
            dump_matrices.as_deref(),
            opts,
        )?,
    };
    emit(&report, common, &config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
