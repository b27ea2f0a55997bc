use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;

use clap::Parser;
use nlse_transport::run::load_config;
use nlse_transport::{run, Mode, RunOptions, TransportError, WORKERS_ENV};

/// Steady-state and correlation calculations for light in a driven
/// nonlinear medium.
#[derive(Parser)]
#[command(name = "nlse-transport", version)]
struct Cli {
    mode: Mode,
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep workers.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Semiclassical transmission spectrum.
    #[arg(long, conflicts_with = "saturation")]
    spectrum: bool,
    /// Semiclassical transmission against photon number.
    #[arg(long)]
    saturation: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), TransportError> {
    let mut config = load_config(&cli.config)?;
    if cli.spectrum || cli.saturation {
        config.semiclassical.kind = if cli.saturation {
            nlse_transport::config::SemiclassicalKind::Saturation
        } else {
            nlse_transport::config::SemiclassicalKind::Spectrum
        };
    }
    let mode = config.resolve_mode(Some(cli.mode))?;
    let opts = RunOptions { out_dir: cli.out.clone(), workers: cli.workers };
    let cancel = AtomicBool::new(false);
    let manifest = run(&config, mode, &opts, &cancel)?;
    println!("run {} ({}): {} files", manifest.run_id, manifest.mode, manifest.outputs.len());
    for o in &manifest.outputs {
        println!("  {}", o.path);
    }
    Ok(())
}
