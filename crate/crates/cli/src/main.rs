use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voxkv_cli::{commands, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "voxkv", version, about = "Block-access traces, reserved-way cache simulation and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured cache profile (cpu-table5, gpu-table6).
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Render the trajectory, integrate it and write trace.csv and store_stats.json.
    GenTrace(Common),
    /// Replay a trace through the cache model.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trace CSV; defaults to <out>/trace.csv.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Store statistics JSON; defaults to store_stats.json beside the trace.
        #[arg(long)]
        store_stats: Option<PathBuf>,
    },
    /// Resolution sweep and store footprint comparison.
    Sweep(Common),
    /// Reuse-gap histogram, distinct blocks per frame and hit-rate curve.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Trace CSV; defaults to <out>/trace.csv.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every stage and write manifest.json.
    Report(Common),
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    RunConfig::load(c.config.as_deref(), c.seed, c.profile.as_deref())
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::GenTrace(c) => commands::gen_trace(&load(&c)?, &c.out),
        Command::Simulate {
            common,
            trace,
            store_stats,
        } => {
            let trace = trace.unwrap_or_else(|| common.out.join(commands::TRACE_FILE));
            commands::simulate(&load(&common)?, &trace, store_stats.as_deref(), &common.out)
        }
        Command::Sweep(c) => commands::sweep(&load(&c)?, &c.out),
        Command::Analyze { common, trace } => {
            let trace = trace.unwrap_or_else(|| common.out.join(commands::TRACE_FILE));
            commands::analyze(&load(&common)?, &trace, &common.out)
        }
        Command::Report(c) => commands::report(&load(&c)?, &c.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("voxkv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
