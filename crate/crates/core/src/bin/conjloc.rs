use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conjloc::cli::{exit_code, run, Mode, RunConfig, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "conjloc", version, about = "Conjugate loci, cusps and cusp bifurcations")]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set n_psi=512.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate locus of one base point with its cusps.
    Locus(Common),
    /// R and rho contours in the tangent plane and their intersections.
    Contours(Common),
    /// xi3(R) along a symmetry line.
    PathScan(Common),
    /// Cusp counts over a (theta, phi) grid.
    RegionMap(Common),
    /// Image of the rho contour and its loops through the cusps.
    Beta(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (mode, common) = match cli.mode {
        Command::Locus(c) => (Mode::Locus, c),
        Command::Contours(c) => (Mode::Contours, c),
        Command::PathScan(c) => (Mode::PathScan, c),
        Command::RegionMap(c) => (Mode::RegionMap, c),
        Command::Beta(c) => (Mode::Beta, c),
    };
    let result = RunConfig::load(mode, common.config.as_deref(), &common.overrides).and_then(|cfg| run(&cfg));
    match &result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            if out.partial {
                eprintln!("conjloc: partial result, see summary.json");
            }
        }
        Err(e) => eprintln!("conjloc: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
