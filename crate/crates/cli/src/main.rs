use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use slit_cli::{commands, router, AppState};
use slit_core::sim::RunOptions;
use slit_core::{load_config, Exec, SchedulerKind, SelectionPolicy, Simulation};

#[derive(Parser)]
#[command(name = "slit", version, about = "Geo-distributed LLM inference scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// slit, rr, least-queue or nearest.
    #[arg(long, default_value = "slit")]
    scheduler: SchedulerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the configured epoch count.
    #[arg(long)]
    epochs: Option<u32>,
    /// Multiplies the configured request scale.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Evaluate candidates on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn options(&self, policy: SelectionPolicy) -> RunOptions {
        RunOptions {
            scheduler: self.scheduler,
            policy,
            seed: self.seed,
            epochs: self.epochs,
            scale: self.scale,
            exec: if self.sequential { Exec::Sequential } else { Exec::default() },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every epoch with a fixed selection policy and write the outputs.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// carbon, ttft, water, cost or balance.
        #[arg(long = "select", default_value = "balance")]
        policy: SelectionPolicy,
        /// Replay an NDJSON trace instead of generating one.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve an interactive session over HTTP.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Commit the balanced plan when no selection arrives within SECS.
        #[arg(long, value_name = "SECS")]
        auto_select_after: Option<f64>,
    },
    /// Write the configured synthetic trace as NDJSON.
    GenTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare finished runs against one of them.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        normalize_to: String,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Simulate {
            run,
            policy,
            trace,
            out,
        } => {
            let sim = commands::simulate(&run.config, run.options(policy), trace.as_deref(), &out)?;
            let t = sim.report().totals;
            info!(
                "{}: ttft {:.3} s, carbon {:.3} kg, water {:.3} L, cost ${:.2}",
                sim.options().run_label(),
                t.objectives.ttft,
                t.objectives.carbon,
                t.objectives.water,
                t.objectives.cost
            );
        }
        Command::Serve {
            run,
            port,
            auto_select_after,
        } => {
            let loaded = load_config(&run.config)?;
            let sim = Simulation::from_loaded(&loaded, run.options(SelectionPolicy::Interactive))?;
            let wait = auto_select_after.map(Duration::from_secs_f64);
            serve(AppState::new(sim, wait), port)?;
        }
        Command::GenTrace { config, seed, out } => {
            let n = commands::gen_trace(&config, seed, &out)?;
            info!("wrote {n} requests to {}", out.display());
        }
        Command::Report {
            runs,
            normalize_to,
            out,
        } => {
            let mut stdout = io::stdout().lock();
            commands::report(&runs, &normalize_to, matches!(out, Format::Csv), &mut stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[tokio::main]
async fn serve(state: AppState, port: u16) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
