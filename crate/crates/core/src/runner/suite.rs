use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{lsr, nms, travel_distance, SUCCESS_THRESHOLD};
use crate::explore::Policy;
use crate::runner::config::{Config, EnvKind};
use crate::runner::env::Environment;
use crate::runner::session::{ExplorationSession, StopReason};

/// Outcome of one session in a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub env_seed: u64,
    pub policy: Policy,
    pub seed: u64,
    pub steps: usize,
    pub stop: Option<StopReason>,
    pub candidates: usize,
    pub ari_c: f64,
    pub ari_i: f64,
    pub nms_c: f64,
    pub nms_i: f64,
    pub lsr_c: f64,
    pub lsr_i: f64,
    pub travel_total: f64,
    /// Total travel divided by the number of candidate points.
    pub travel_per_candidate: f64,
}

impl RunSummary {
    pub fn from_session(env_seed: u64, session: &ExplorationSession) -> Self {
        let rec = session.records();
        let pad_c: Vec<f64> = rec.iter().map(|r| r.ari_c_pad).collect();
        let pad_i: Vec<f64> = rec.iter().map(|r| r.ari_i_pad).collect();
        let travel: Vec<f64> = rec.iter().map(|r| r.travel_cells).collect();
        let n = session.environment().candidates.len();
        let t = travel_distance(&travel, n);
        Self {
            env_seed,
            policy: session.config().policy.name,
            seed: session.config().run.seed,
            steps: rec.len(),
            stop: session.stopped(),
            candidates: n,
            ari_c: pad_c.last().copied().unwrap_or(f64::NAN),
            ari_i: pad_i.last().copied().unwrap_or(f64::NAN),
            nms_c: nms(&pad_c, SUCCESS_THRESHOLD),
            nms_i: nms(&pad_i, SUCCESS_THRESHOLD),
            lsr_c: lsr(&pad_c, SUCCESS_THRESHOLD),
            lsr_i: lsr(&pad_i, SUCCESS_THRESHOLD),
            travel_total: t.total,
            travel_per_candidate: t.per_candidate,
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: Policy,
    pub runs: usize,
    pub ari_c: Stat,
    pub ari_i: Stat,
    pub travel_per_candidate: Stat,
    pub nms_c: Stat,
    pub nms_i: Stat,
    pub lsr_c: Stat,
    pub lsr_i: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub runs: Vec<RunSummary>,
    pub summary: Vec<PolicySummary>,
}

#[derive(Serialize)]
struct SummaryRow {
    policy: Policy,
    runs: usize,
    ari_c_mean: f64,
    ari_c_std: f64,
    ari_i_mean: f64,
    ari_i_std: f64,
    travel_mean: f64,
    travel_std: f64,
    nms_c_mean: f64,
    nms_i_mean: f64,
    lsr_c_mean: f64,
    lsr_i_mean: f64,
}

impl SuiteReport {
    pub fn from_runs(runs: Vec<RunSummary>, policies: &[Policy]) -> Self {
        let summary = policies
            .iter()
            .map(|&policy| {
                let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.policy == policy).collect();
                let stat = |f: fn(&RunSummary) -> f64| {
                    Stat::of(&mine.iter().map(|r| f(r)).collect::<Vec<_>>())
                };
                PolicySummary {
                    policy,
                    runs: mine.len(),
                    ari_c: stat(|r| r.ari_c),
                    ari_i: stat(|r| r.ari_i),
                    travel_per_candidate: stat(|r| r.travel_per_candidate),
                    nms_c: stat(|r| r.nms_c),
                    nms_i: stat(|r| r.nms_i),
                    lsr_c: stat(|r| r.lsr_c),
                    lsr_i: stat(|r| r.lsr_i),
                }
            })
            .collect();
        Self { runs, summary }
    }

    pub fn policy(&self, policy: Policy) -> Option<&PolicySummary> {
        self.summary.iter().find(|s| s.policy == policy)
    }

    pub fn write_runs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.runs {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.summary {
            w.serialize(SummaryRow {
                policy: s.policy,
                runs: s.runs,
                ari_c_mean: s.ari_c.mean,
                ari_c_std: s.ari_c.std,
                ari_i_mean: s.ari_i.mean,
                ari_i_std: s.ari_i.std,
                travel_mean: s.travel_per_candidate.mean,
                travel_std: s.travel_per_candidate.std,
                nms_c_mean: s.nms_c.mean,
                nms_i_mean: s.nms_i.mean,
                lsr_c_mean: s.lsr_c.mean,
                lsr_i_mean: s.lsr_i.mean,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Final ARIs and normalized travel per policy as a Markdown table.
    pub fn table(&self) -> String {
        let mut s = String::from(
            "| Method | ARI C | ARI i | Travel (cells/candidate) |\n|---|---|---|---|\n",
        );
        for p in &self.summary {
            let _ = writeln!(
                s,
                "| {} | {:.3} ± {:.3} | {:.3} ± {:.3} | {:.2} ± {:.2} |",
                p.policy,
                p.ari_c.mean,
                p.ari_c.std,
                p.ari_i.mean,
                p.ari_i.std,
                p.travel_per_candidate.mean,
                p.travel_per_candidate.std
            );
        }
        s
    }
}

/// Runs every (environment seed, policy, seed) cell of the suite matrix.
/// Sessions run in parallel; results keep matrix order.
pub fn run_suite(config: &Config) -> Result<SuiteReport> {
    let suite = config
        .suite
        .as_ref()
        .ok_or_else(|| Error::Config("missing [suite] table".into()))?;
    let env_seeds = match config.env.kind {
        EnvKind::Synth => suite.env_seeds.clone(),
        EnvKind::Map => vec![config.env.seed],
    };
    let envs = env_seeds
        .par_iter()
        .map(|&s| {
            let mut env_cfg = config.env.clone();
            env_cfg.seed = s;
            Ok((s, Arc::new(Environment::build(&env_cfg)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for (env_seed, env) in &envs {
        for &policy in &suite.policies {
            for &seed in &suite.seeds {
                cells.push((*env_seed, env.clone(), policy, seed));
            }
        }
    }
    let runs = cells
        .into_par_iter()
        .map(|(env_seed, env, policy, seed)| {
            let mut cfg = config.clone();
            cfg.env.seed = env_seed;
            cfg.policy.name = policy;
            cfg.run.seed = seed;
            cfg.suite = None;
            let mut session = ExplorationSession::new(cfg, env)?;
            session.run_to_end()?;
            Ok(RunSummary::from_session(env_seed, &session))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::from_runs(runs, &suite.policies))
}
