use clap::Parser;
use scri::cli::config::Experiment;
use scri::cli::{run_cli, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Scattering experiments on the compactified Helmholtz problem.
#[derive(Debug, Parser)]
#[command(name = "scri-solve", version)]
struct Args {
    /// modal-convergence, beam-compare, anisotropic-selfconv, barrier-scan or scattering-map
    experiment: Experiment,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Wavenumber(s), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Angular mode(s), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long)]
    nrho: Option<String>,
    #[arg(long)]
    ntheta: Option<String>,
    /// constant, short-range, long-range or anisotropic
    #[arg(long)]
    medium: Option<String>,
    /// characteristic or hyperbolic
    #[arg(long)]
    route: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 when a check fails.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let overrides = Overrides {
        k: args.k,
        kappa: args.kappa,
        m: args.m,
        nrho: args.nrho,
        ntheta: args.ntheta,
        medium: args.medium,
        route: args.route,
        out: args.out,
    };
    match run_cli(args.experiment, &args.config, &overrides, args.check) {
        Ok(outcome) => {
            for c in &outcome.artifact.checks {
                println!("{}", c.line());
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("scri-solve: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
