use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use spatial_concepts::explore::Policy;
use spatial_concepts::runner::Config;
use spco::commands::{self, Overrides};
use spco::service::{router, AppState};

#[derive(Parser)]
#[command(
    name = "spco",
    version,
    about = "Active exploration for spatial concept learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scripted exploration session and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out/run")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        policy: Option<Policy>,
        #[arg(long)]
        particles: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the policy x seed x environment matrix of a config's [suite].
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out/suite")]
        out: PathBuf,
    },
    /// Re-run a session from its observation log, optionally resuming a snapshot.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value = "out/replay")]
        out: PathBuf,
    },
    /// Summarize a run directory: final ARIs, NMS, LSR and travel.
    Eval {
        #[arg(long)]
        run: PathBuf,
    },
    /// Serve live sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Config used when a create request has none.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<String, Box<dyn std::error::Error>> {
    Ok(match command {
        Command::Run {
            config,
            out,
            seed,
            policy,
            particles,
            steps,
        } => commands::run(
            &config,
            &out,
            &Overrides {
                seed,
                policy,
                particles,
                steps,
            },
        )?,
        Command::Suite { config, out } => commands::suite(&config, &out)?,
        Command::Replay {
            config,
            log,
            snapshot,
            out,
        } => commands::replay_run(&config, &log, snapshot.as_deref(), &out)?,
        Command::Eval { run } => serde_json::to_string_pretty(&commands::eval(&run)?)?,
        Command::Serve { addr, config } => {
            let defaults = config.map(Config::load).transpose()?;
            serve(addr, defaults)?;
            String::from("server stopped")
        }
    })
}

fn serve(addr: SocketAddr, defaults: Option<Config>) -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(Arc::new(AppState::new(defaults))))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
