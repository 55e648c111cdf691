//! Configuration, exploration sessions, batch suites and run artifacts.

mod config;
mod env;
mod output;
mod session;
mod suite;

use std::sync::Arc;

pub use config::{
    Config, EnvConfig, EnvKind, MapFiles, PolicyConfig, RunConfig, SuiteConfig, VocabularyMode,
};
pub use env::Environment;
pub use output::{
    metrics_csv, overlay, write_ig_table_csv, write_metrics_csv, write_run_outputs,
    CandidateOverlay, MapInfo, Overlay, PosdistOverlay, WordScore, OVERLAY_TOP_WORDS,
};
pub use session::{
    ExplorationSession, LoggedAnswer, PendingQuery, SessionSnapshot, StepRecord, StopReason,
};
pub use suite::{run_suite, PolicySummary, RunSummary, Stat, SuiteReport};

use crate::error::Result;

/// Builds the environment and runs the scripted loop to completion.
pub fn run_session(config: Config) -> Result<ExplorationSession> {
    let env = Arc::new(Environment::build(&config.env)?);
    let mut session = ExplorationSession::new(config, env)?;
    session.run_to_end()?;
    Ok(session)
}

/// Rebuilds a session from `config` (or from `snapshot`, whose own config is
/// used) and feeds it the logged answers that follow the starting step.
pub fn replay(
    config: Config,
    snapshot: Option<SessionSnapshot>,
    log: &[LoggedAnswer],
) -> Result<ExplorationSession> {
    let (cfg, start) = match &snapshot {
        Some(s) => (s.config.clone(), s.records.len()),
        None => (config, 0),
    };
    let env = Arc::new(Environment::build(&cfg.env)?);
    let mut session = match snapshot {
        Some(s) => ExplorationSession::from_snapshot(s, env)?,
        None => ExplorationSession::new(cfg, env)?,
    };
    session.replay(log.get(start..).unwrap_or_default())?;
    Ok(session)
}
