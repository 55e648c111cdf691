use std::fs::File;
use std::path::Path;

use serde::Serialize;
use spatial_concepts::eval::{lsr, nms, travel_distance, SUCCESS_THRESHOLD};
use spatial_concepts::explore::Policy;
use spatial_concepts::runner::{
    replay, run_session, run_suite, write_run_outputs, Config, LoggedAnswer, Overlay,
    SessionSnapshot,
};
use spatial_concepts::Result;

/// Optional command-line overrides of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub policy: Option<Policy>,
    pub particles: Option<usize>,
    pub steps: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(p) = self.policy {
            cfg.policy.name = p;
        }
        if let Some(r) = self.particles {
            cfg.model.particles = r;
        }
        if let Some(t) = self.steps {
            cfg.run.steps = Some(t);
        }
        cfg.validate()
    }
}

pub fn run(config: &Path, out: &Path, overrides: &Overrides) -> Result<String> {
    let mut cfg = Config::load(config)?;
    overrides.apply(&mut cfg)?;
    let session = run_session(cfg)?;
    write_run_outputs(&session, out)?;
    let last = session.records().last();
    Ok(format!(
        "{} steps, stop {:?}, final ARI C {:.3}, ARI i {:.3}, travel {} cells -> {}",
        session.records().len(),
        session.stopped(),
        last.map_or(f64::NAN, |r| r.ari_c_pad),
        last.map_or(f64::NAN, |r| r.ari_i_pad),
        last.map_or(0.0, |r| r.cum_travel),
        out.display()
    ))
}

pub fn suite(config: &Path, out: &Path) -> Result<String> {
    let cfg = Config::load(config)?;
    let report = run_suite(&cfg)?;
    std::fs::create_dir_all(out)?;
    report.write_runs_csv(File::create(out.join("runs.csv"))?)?;
    report.write_summary_csv(File::create(out.join("summary.csv"))?)?;
    let table = report.table();
    std::fs::write(out.join("summary.md"), &table)?;
    Ok(table)
}

pub fn replay_run(
    config: &Path,
    log: &Path,
    snapshot: Option<&Path>,
    out: &Path,
) -> Result<String> {
    let cfg = Config::load(config)?;
    let log: Vec<LoggedAnswer> = serde_json::from_str(&std::fs::read_to_string(log)?)?;
    let snap = snapshot
        .map(|p| -> Result<SessionSnapshot> {
            Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?)
        })
        .transpose()?;
    let session = replay(cfg, snap, &log)?;
    write_run_outputs(&session, out)?;
    Ok(format!(
        "replayed {} steps -> {}",
        session.records().len(),
        out.display()
    ))
}

#[derive(Debug, Serialize)]
pub struct RunEvaluation {
    pub steps: usize,
    pub final_ari_c: f64,
    pub final_ari_i: f64,
    pub nms_c: f64,
    pub nms_i: f64,
    pub lsr_c: f64,
    pub lsr_i: f64,
    pub travel_total: f64,
    pub travel_per_candidate: f64,
}

#[derive(serde::Deserialize)]
struct MetricsRow {
    ari_c_pad: f64,
    ari_i_pad: f64,
    travel_cells: f64,
}

/// Summary metrics of a run directory written by `run` or `replay`.
pub fn eval(run_dir: &Path) -> Result<RunEvaluation> {
    let mut reader = csv::Reader::from_path(run_dir.join("metrics.csv"))?;
    let rows = reader
        .deserialize::<MetricsRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let overlay: Overlay =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("overlay.json"))?)?;
    let c: Vec<f64> = rows.iter().map(|r| r.ari_c_pad).collect();
    let i: Vec<f64> = rows.iter().map(|r| r.ari_i_pad).collect();
    let travel: Vec<f64> = rows.iter().map(|r| r.travel_cells).collect();
    let t = travel_distance(&travel, overlay.candidates.len());
    Ok(RunEvaluation {
        steps: rows.len(),
        final_ari_c: c.last().copied().unwrap_or(f64::NAN),
        final_ari_i: i.last().copied().unwrap_or(f64::NAN),
        nms_c: nms(&c, SUCCESS_THRESHOLD),
        nms_i: nms(&i, SUCCESS_THRESHOLD),
        lsr_c: lsr(&c, SUCCESS_THRESHOLD),
        lsr_i: lsr(&i, SUCCESS_THRESHOLD),
        travel_total: t.total,
        travel_per_candidate: t.per_candidate,
    })
}
