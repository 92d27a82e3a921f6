use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flexhull_cli::run::{self, RunError};
use flexhull_cli::{Fleet, FleetConfig};

#[derive(Parser)]
#[command(
    name = "flexhull",
    version,
    about = "Homothetic approximations of DER flexibility domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit outer and inner homothets for one DER (or every DER).
    Fit {
        #[command(flatten)]
        common: Common,
        /// Index of the DER to fit; all DERs when omitted.
        #[arg(long)]
        der: Option<usize>,
    },
    /// Fit the fleet, aggregate, score and write reports plus plot data.
    Aggregate(Common),
    /// Compare every fit with the brute-force oracle.
    Oracle(Common),
    /// Write plot CSVs only.
    EmitPlots(Common),
}

#[derive(Args)]
struct Common {
    /// Fleet configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for the per-DER map.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides `fit.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `outputs` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(command: Command) -> Result<Vec<PathBuf>, RunError> {
    let common = match &command {
        Command::Fit { common, .. }
        | Command::Aggregate(common)
        | Command::Oracle(common)
        | Command::EmitPlots(common) => common,
    };
    let fleet: Fleet = FleetConfig::load(&common.config)?.build()?;
    let seed = common.seed.unwrap_or(fleet.config.fit.seed);
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| fleet.config.outputs.clone());
    let jobs = match common.jobs {
        Some(0) => {
            return Err(flexhull_cli::ConfigError("--jobs: must be at least 1".into()).into())
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| RunError::Output(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &command {
        Command::Fit { der, .. } => run::cmd_fit(&fleet, *der, &out),
        Command::Aggregate(_) => run::cmd_aggregate(&fleet, seed, &out),
        Command::Oracle(_) => run::cmd_oracle(&fleet, seed, &out),
        Command::EmitPlots(_) => run::cmd_emit_plots(&fleet, seed, &out),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
