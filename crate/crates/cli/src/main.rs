//! `sdsim` — experiment driver for the Schrodinger-Debye toolkit.
//!
//! Every subcommand reads one JSON config (whose `scenario` tag must match
//! the subcommand) and writes its artifacts into `--out`: a verbatim
//! `provenance.txt`, a `summary.json`, and CSV diagnostics where the scenario
//! integrates. Outputs carry no timestamps and are byte-reproducible from the
//! config. Exit status 0 means the experiment ran — including runs that end
//! in a detected blow-up, which is a result, not an error. Broken configs,
//! I/O failures and refused hypotheses exit nonzero.

mod config;
mod emit;
mod scenarios;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "sdsim", version, about = "Simulator and analytic calculators for the Schrodinger-Debye system", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RegionsArgs {
    /// Experiment configuration (JSON) for tabulated output
    #[arg(long, conflicts_with_all = ["n", "s", "kappa"])]
    config: Option<PathBuf>,
    /// Output directory (with --config)
    #[arg(long, requires = "config")]
    out: Option<PathBuf>,
    /// Dimension for a single inline query (with --s and --kappa)
    #[arg(long, requires_all = ["s", "kappa"])]
    n: Option<u32>,
    /// Wave regularity exponent for an inline query
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Excitation regularity exponent for an inline query
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configured experiment and write diagnostics
    Run(ConfigArgs),
    /// Integrate the same data across a list of relaxation times
    Sweep(ConfigArgs),
    /// Compare d^2/dt^2 of the variance with its analytic right-hand side
    VirialCheck(ConfigArgs),
    /// Verify the relaxation-time rescaling on a paired run
    RescaleCheck(ConfigArgs),
    /// Evaluate the gradient-trapping bootstrap and test it on a run
    GwpTrap(ConfigArgs),
    /// Compute the finite-time collapse window for negative-energy data
    BlowupWindow(ConfigArgs),
    /// Query (inline) or tabulate (config) the well-posedness region
    Regions(RegionsArgs),
    /// Materialize a configured data pair as CSV with its energy facts
    Negdata(ConfigArgs),
}

fn dispatch(subcommand: &str, args: &ConfigArgs) -> Result<()> {
    let loaded = config::load_config(&args.config)?;
    scenarios::execute(subcommand, &loaded, &args.out)
}

fn regions(args: &RegionsArgs) -> Result<()> {
    match (&args.config, args.n, args.s, args.kappa) {
        (Some(path), None, None, None) => {
            let out = args
                .out
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("--config also needs --out"))?;
            let loaded = config::load_config(path)?;
            scenarios::execute("regions", &loaded, out)
        }
        (None, Some(n), Some(s), Some(kappa)) => {
            let point = scenarios::regions_point(n, s, kappa)?;
            println!("{}", serde_json::to_string(&point)?);
            Ok(())
        }
        _ => bail!("regions takes either --config/--out or all of --n/--s/--kappa"),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => dispatch("run", args),
        Command::Sweep(args) => dispatch("sweep", args),
        Command::VirialCheck(args) => dispatch("virial-check", args),
        Command::RescaleCheck(args) => dispatch("rescale-check", args),
        Command::GwpTrap(args) => dispatch("gwp-trap", args),
        Command::BlowupWindow(args) => dispatch("blowup-window", args),
        Command::Regions(args) => regions(args),
        Command::Negdata(args) => dispatch("negdata", args),
    };
    if let Err(err) = result {
        // the {:#} chain, without the backtrace Debug formatting would add
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
