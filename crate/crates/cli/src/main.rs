//! `modspace`: norms, evolutions, estimate checks and exponent queries.

mod artifacts;
mod commands;
mod config;
mod datum;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modspace::{Equation, Exponent, ThirdConditionMode};

use commands::exponents::{AdmissibleArgs, ScanArgs};
use commands::Invocation;
use config::Format;
use error::CliError;

#[derive(Parser)]
#[command(name = "modspace", version, about = "Modulation-space norms, dispersive evolution and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact format; overrides `format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Modulation norms of the `[norm]` datum.
    Norm(RunArgs),
    /// Evolve the `[evolve]` equation.
    Evolve(RunArgs),
    /// Fit and judge an estimate's constant on a field corpus.
    Verify {
        /// List estimate ids and exit.
        #[arg(long, conflicts_with = "estimate")]
        list: bool,
        #[arg(long)]
        estimate: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide Strichartz-type admissibility of (p, r), or scan a region.
    Admissible {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: Option<Exponent>,
        #[arg(long)]
        r: Option<Exponent>,
        /// `schrodinger` or `kg`.
        #[arg(long, default_value = "schrodinger")]
        equation: Equation,
        /// Reading of the third condition: `reciprocal`, `as_written` or `off`.
        #[arg(long, default_value = "reciprocal")]
        mode: ThirdConditionMode,
        /// Emit the feasible region over a (p, r) lattice instead of one point.
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value = "3")]
        p_max: Exponent,
        #[arg(long, default_value_t = 20)]
        p_steps: u32,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,6,8,inf")]
        r_values: Vec<Exponent>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, default_value = commands::DEFAULT_OUTPUT_DIR)]
        out: PathBuf,
    },
    /// Decide the inclusion of L^p_{s1} in M^{p,q}_{s2}.
    Embed {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
        #[arg(long, allow_hyphen_values = true)]
        s1: f64,
        #[arg(long, allow_hyphen_values = true)]
        s2: f64,
        /// Search for a field family showing the failure.
        #[arg(long)]
        witness: bool,
    },
}

fn invocation(args: RunArgs, required: bool) -> Result<Invocation, CliError> {
    let loaded = match args.config {
        Some(path) => Some(config::load(&path)?),
        None if required => return Err(CliError::Validation("--config is required".into())),
        None => None,
    };
    Ok(Invocation::new(loaded, args.seed, args.out, args.format))
}

fn dispatch(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.command {
        Command::Norm(args) => commands::norm::run(&invocation(args, true)?),
        Command::Evolve(args) => commands::evolve::run(&invocation(args, true)?),
        Command::Verify { list: true, .. } => Ok(commands::verify::list()),
        Command::Verify { estimate, run, .. } => commands::verify::run(&invocation(run, false)?, estimate.as_deref()),
        Command::Admissible { d, p, r, equation, mode, scan, p_max, p_steps, r_values, format, out } => {
            let p = match (p, scan) {
                (Some(p), _) => p,
                (None, true) => "3".parse()?,
                (None, false) => return Err(CliError::Validation("--p is required unless --scan is given".into())),
            };
            let scan = scan.then_some(ScanArgs { p_max, p_steps, r_values, format, out });
            commands::exponents::admissible(&AdmissibleArgs { equation, d, p, r, mode, scan })
        }
        Command::Embed { d, p, q, s1, s2, witness } => commands::exponents::embed(d, p, q, s1, s2, witness),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summaries serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("modspace: {e}");
            e.exit_code()
        }
    }
}
