use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    generate_candidates, load_map, synth_environment, CandidateSet, MapMetadata, OccupancyGrid,
    RoomLayout,
};
use crate::model::Point;
use crate::runner::config::{EnvConfig, EnvKind};
use crate::teacher::Annotation;

/// Map, candidate points and optional ground truth of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub grid: OccupancyGrid,
    pub candidates: CandidateSet,
    pub annotation: Option<Annotation>,
    /// True place label of every candidate, when annotated.
    pub truth: Option<Vec<usize>>,
    pub rooms: Vec<RoomLayout>,
    pub start: [f64; 2],
}

impl Environment {
    pub fn build(cfg: &EnvConfig) -> Result<Self> {
        match cfg.kind {
            EnvKind::Synth => {
                let env = synth_environment(cfg.seed, &cfg.synth)?;
                Self::from_parts(env.grid, Some(env.annotation), env.rooms, cfg)
            }
            EnvKind::Map => {
                let files = cfg
                    .map
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [env.map]".into()))?;
                let meta = MapMetadata::parse(&std::fs::read_to_string(&files.metadata)?)?;
                let grid = load_map(&std::fs::read(&files.image)?, &meta)?;
                let annotation = files
                    .annotation
                    .as_ref()
                    .map(Annotation::load)
                    .transpose()?;
                Self::from_parts(grid, annotation, Vec::new(), cfg)
            }
        }
    }

    pub fn from_parts(
        grid: OccupancyGrid,
        annotation: Option<Annotation>,
        rooms: Vec<RoomLayout>,
        cfg: &EnvConfig,
    ) -> Result<Self> {
        let candidates = generate_candidates(&grid, cfg.spacing, cfg.clearance);
        if candidates.is_empty() {
            return Err(Error::Config("the map has no candidate points".into()));
        }
        let truth = annotation
            .as_ref()
            .map(|a| {
                candidates
                    .iter()
                    .map(|(_, p)| a.label_of(&p))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let start = match cfg.start {
            Some(s) => {
                if grid.free_cell_of(&Point::new(s[0], s[1])).is_none() {
                    return Err(Error::Config(format!("start {s:?} is not in free space")));
                }
                s
            }
            None => {
                let p = central_candidate(&candidates);
                [p.x, p.y]
            }
        };
        Ok(Self {
            grid,
            candidates,
            annotation,
            truth,
            rooms,
            start,
        })
    }

    pub fn start(&self) -> Point {
        Point::new(self.start[0], self.start[1])
    }
}

/// Candidate closest to the centroid of all candidates, lowest id on ties.
fn central_candidate(candidates: &CandidateSet) -> Point {
    let points = candidates.points();
    let centroid = points.iter().sum::<Point>() / points.len() as f64;
    let mut best = points[0];
    for p in &points[1..] {
        if (p - centroid).norm_squared() < (best - centroid).norm_squared() {
            best = *p;
        }
    }
    best
}
