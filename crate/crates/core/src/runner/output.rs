use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{decode_position, pmi_top_words};
use crate::grid::RoomLayout;
use crate::runner::session::ExplorationSession;

#[derive(Serialize)]
struct MetricsRow {
    step: usize,
    ari_c_step: f64,
    ari_i_step: f64,
    ari_c_pad: f64,
    ari_i_pad: f64,
    travel_cells: f64,
    cum_travel: f64,
    max_ig: f64,
}

#[derive(Serialize)]
struct IgTableRow {
    step: usize,
    candidate_id: usize,
    x: f64,
    y: f64,
    ig: f64,
    travel_cost: f64,
    utility: f64,
    chosen: u8,
}

/// Per-step metrics, one row per observation.
pub fn write_metrics_csv<W: Write>(session: &ExplorationSession, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in session.records() {
        w.serialize(MetricsRow {
            step: r.step,
            ari_c_step: r.ari_c_step,
            ari_i_step: r.ari_i_step,
            ari_c_pad: r.ari_c_pad,
            ari_i_pad: r.ari_i_pad,
            travel_cells: r.travel_cells,
            cum_travel: r.cum_travel,
            max_ig: r.max_ig,
        })?;
    }
    if session.records().is_empty() {
        w.write_record([
            "step",
            "ari_c_step",
            "ari_i_step",
            "ari_c_pad",
            "ari_i_pad",
            "travel_cells",
            "cum_travel",
            "max_ig",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn metrics_csv(session: &ExplorationSession) -> Result<String> {
    let mut buf = Vec::new();
    write_metrics_csv(session, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Every scored candidate of every step.
pub fn write_ig_table_csv<W: Write>(session: &ExplorationSession, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (record, table) in session.records().iter().zip(session.tables()) {
        for row in &table.rows {
            w.serialize(IgTableRow {
                step: record.step,
                candidate_id: row.candidate,
                x: row.x,
                y: row.y,
                ig: row.ig,
                travel_cost: row.travel_cost,
                utility: row.utility,
                chosen: u8::from(row.candidate == record.candidate),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapInfo {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub word: String,
    pub pmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosdistOverlay {
    pub index: usize,
    pub count: u32,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    pub top_words: Vec<WordScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOverlay {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub visits: usize,
    /// Most probable concept and position distribution under the best
    /// particle's parameters.
    pub concept: usize,
    pub posdist: usize,
    pub truth: Option<usize>,
}

/// Data behind map figures: learned Gaussians with their characteristic
/// words, and candidate labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub step: usize,
    pub map: MapInfo,
    pub posdists: Vec<PosdistOverlay>,
    pub candidates: Vec<CandidateOverlay>,
    pub rooms: Vec<RoomLayout>,
}

pub const OVERLAY_TOP_WORDS: usize = 5;

pub fn overlay(session: &ExplorationSession) -> Result<Overlay> {
    let env = session.environment();
    let best = session.particles().best();
    let params = best.params();
    let vocab = session.vocabulary();
    let mut posdists = Vec::new();
    for k in 0..params.mu.len() {
        let count = best.stats().n_posdist(k);
        if count == 0 {
            continue;
        }
        let top_words = pmi_top_words(params, k, OVERLAY_TOP_WORDS)?
            .into_iter()
            .map(|(g, pmi)| WordScore {
                word: vocab.word(g).unwrap_or_default().to_string(),
                pmi,
            })
            .collect();
        let (m, s) = (params.mu[k], params.sigma[k]);
        posdists.push(PosdistOverlay {
            index: k,
            count,
            mean: [m.x, m.y],
            covariance: [[s[(0, 0)], s[(0, 1)]], [s[(1, 0)], s[(1, 1)]]],
            top_words,
        });
    }
    let visited = &session.exploration().visited;
    let candidates = env
        .candidates
        .iter()
        .map(|(id, p)| {
            let a = decode_position(params, &p)?;
            Ok(CandidateOverlay {
                id,
                x: p.x,
                y: p.y,
                visits: visited.iter().filter(|&&c| c == id).count(),
                concept: a.concept,
                posdist: a.posdist,
                truth: env.truth.as_ref().map(|t| t[id]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let origin = env.grid.origin();
    Ok(Overlay {
        step: session.records().len(),
        map: MapInfo {
            width: env.grid.width(),
            height: env.grid.height(),
            resolution: env.grid.resolution(),
            origin: [origin.x, origin.y],
        },
        posdists,
        candidates,
        rooms: env.rooms.clone(),
    })
}

/// Writes metrics.csv, ig_table.csv, observations.json, snapshot.json,
/// overlay.json and the resolved config.toml into `dir`.
pub fn write_run_outputs(session: &ExplorationSession, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_metrics_csv(session, std::fs::File::create(dir.join("metrics.csv"))?)?;
    write_ig_table_csv(session, std::fs::File::create(dir.join("ig_table.csv"))?)?;
    std::fs::write(
        dir.join("observations.json"),
        serde_json::to_string_pretty(&session.observation_log())?,
    )?;
    std::fs::write(
        dir.join("snapshot.json"),
        serde_json::to_string(&session.snapshot())?,
    )?;
    std::fs::write(
        dir.join("overlay.json"),
        serde_json::to_string_pretty(&overlay(session)?)?,
    )?;
    std::fs::write(dir.join("config.toml"), session.config().to_toml()?)?;
    Ok(())
}
