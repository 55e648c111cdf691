use serde::{Deserialize, Serialize};

use crate::grid::occupancy::{Cell, OccupancyGrid};
use crate::model::Point;

pub const DEFAULT_SPACING: f64 = 0.8;
pub const DEFAULT_CLEARANCE: f64 = 0.5;

/// Ordered candidate points; the id of a point is its index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateSet {
    points: Vec<[f64; 2]>,
}

impl CandidateSet {
    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        Self {
            points: points.into_iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<Point> {
        self.points.get(id).map(|p| Point::new(p[0], p[1]))
    }

    pub fn points(&self) -> Vec<Point> {
        self.iter().map(|(_, p)| p).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        self.points
            .iter()
            .enumerate()
            .map(|(id, p)| (id, Point::new(p[0], p[1])))
    }
}

/// Lattice points at `spacing` from the map origin that sit in a free cell
/// and have no occupied or unknown cell centre within `clearance`. Off-map
/// cells count as unknown. Ids run row by row from the bottom.
pub fn generate_candidates(grid: &OccupancyGrid, spacing: f64, clearance: f64) -> CandidateSet {
    if !(spacing > 0.0) || !(clearance >= 0.0) {
        return CandidateSet::default();
    }
    let res = grid.resolution();
    let origin = grid.origin();
    let extent_x = grid.width() as f64 * res;
    let extent_y = grid.height() as f64 * res;
    let reach = (clearance / res).ceil() as i64 + 1;
    let limit = clearance * clearance * (1.0 + 1e-12);

    let mut points = Vec::new();
    let mut b = 0usize;
    while (b as f64) * spacing < extent_y - 1e-9 {
        let mut a = 0usize;
        while (a as f64) * spacing < extent_x - 1e-9 {
            let p = Point::new(origin.x + a as f64 * spacing, origin.y + b as f64 * spacing);
            if let Some((ci, cj)) = grid.free_cell_of(&p) {
                let (ci, cj) = (ci as i64, cj as i64);
                let clear = (cj - reach..=cj + reach).all(|j| {
                    (ci - reach..=ci + reach).all(|i| {
                        if grid.get_signed(i, j) == Cell::Free {
                            return true;
                        }
                        let cx = origin.x + (i as f64 + 0.5) * res;
                        let cy = origin.y + (j as f64 + 0.5) * res;
                        (cx - p.x).powi(2) + (cy - p.y).powi(2) > limit
                    })
                });
                if clear {
                    points.push(p);
                }
            }
            a += 1;
        }
        b += 1;
    }
    CandidateSet::from_points(points)
}
