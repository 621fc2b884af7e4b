//! `e4surf`: grid export, surface analysis, verification reports and 3D meshes
//! for surfaces in Euclidean 4-space.

mod commands;
mod config;
mod error;
mod surfaces;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "e4surf", version, about = "Extrinsic geometry of surfaces in E4")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Write the sampled grid as a `s,t,x1,x2,x3,x4` table.
    Generate(Common),
    /// Run the class detectors and write verdicts plus per-point geometry.
    Analyze(Common),
    /// Check the reduced equations and closed forms against the measured geometry.
    Verify(Common),
    /// Project the grid to 3D and write a triangle mesh (OBJ).
    Project3d(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path; defaults to `output.path`, then standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the summary on standard error.
    #[arg(long)]
    quiet: bool,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => String::new(),
    };
    Ok(RunConfig::parse_with_overrides(&text, &common.set)?)
}

fn emit(text: &str, path: Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(&path, text).map_err(|source| CliError::Io { path, source }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn run(verb: Verb) -> Result<(), CliError> {
    let (name, common) = match &verb {
        Verb::Generate(c) => ("generate", c),
        Verb::Analyze(c) => ("analyze", c),
        Verb::Verify(c) => ("verify", c),
        Verb::Project3d(c) => ("project3d", c),
    };
    let cfg = load(common)?;
    let setup = surfaces::build(&cfg)?;
    let output = match verb {
        Verb::Generate(_) => commands::generate(&setup),
        Verb::Analyze(_) => commands::analyze(&cfg, &setup),
        Verb::Verify(_) => commands::verify(&cfg, &setup),
        Verb::Project3d(_) => commands::project3d(&cfg, &setup)?,
    };
    let target = common.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    emit(&output.text, target.clone())?;
    if !common.quiet {
        let place = target.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        eprintln!("{name}: {} ({}) -> {place}", setup.patch.label, output.summary);
    }
    if output.errors > 0 {
        return Err(CliError::ChecksErrored { count: output.errors });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("e4surf: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
