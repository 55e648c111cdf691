use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::grid::occupancy::OccupancyGrid;
use crate::model::Point;

pub const UNREACHABLE: u32 = u32::MAX;

fn neighbours(
    grid: &OccupancyGrid,
    i: usize,
    j: usize,
) -> impl Iterator<Item = (usize, usize)> + '_ {
    let candidates = [
        (i.wrapping_sub(1), j),
        (i + 1, j),
        (i, j.wrapping_sub(1)),
        (i, j + 1),
    ];
    candidates
        .into_iter()
        .filter(move |&(a, b)| a < grid.width() && b < grid.height() && grid.is_free(a, b))
}

/// Shortest 4-connected path between two free cells, in cell moves.
pub fn astar_cells(grid: &OccupancyGrid, from: (usize, usize), to: (usize, usize)) -> Option<u32> {
    if !grid.is_free(from.0, from.1) || !grid.is_free(to.0, to.1) {
        return None;
    }
    let h = |(i, j): (usize, usize)| (i.abs_diff(to.0) + j.abs_diff(to.1)) as u32;
    let mut g = vec![UNREACHABLE; grid.width() * grid.height()];
    let mut open = BinaryHeap::new();
    g[grid.index(from.0, from.1)] = 0;
    open.push(Reverse((h(from), 0u32, from)));
    while let Some(Reverse((_, cost, cell))) = open.pop() {
        if cell == to {
            return Some(cost);
        }
        if cost > g[grid.index(cell.0, cell.1)] {
            continue;
        }
        for next in neighbours(grid, cell.0, cell.1) {
            let idx = grid.index(next.0, next.1);
            let c = cost + 1;
            if c < g[idx] {
                g[idx] = c;
                open.push(Reverse((c + h(next), c, next)));
            }
        }
    }
    None
}

fn free_cell(grid: &OccupancyGrid, p: &Point) -> Result<(usize, usize)> {
    grid.free_cell_of(p)
        .ok_or_else(|| Error::Map(format!("({}, {}) is not in a free cell", p.x, p.y)))
}

/// Path length in cells between the free cells containing two points.
pub fn astar_path_length(grid: &OccupancyGrid, from: &Point, to: &Point) -> Result<u32> {
    let a = free_cell(grid, from)?;
    let b = free_cell(grid, to)?;
    astar_cells(grid, a, b).ok_or(Error::Unreachable)
}

/// Breadth-first cell distances from one free cell; `UNREACHABLE` elsewhere.
pub fn distance_field(grid: &OccupancyGrid, from: (usize, usize)) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; grid.width() * grid.height()];
    if !grid.is_free(from.0, from.1) {
        return dist;
    }
    let mut queue = VecDeque::from([from]);
    dist[grid.index(from.0, from.1)] = 0;
    while let Some((i, j)) = queue.pop_front() {
        let d = dist[grid.index(i, j)];
        for (a, b) in neighbours(grid, i, j) {
            let idx = grid.index(a, b);
            if dist[idx] == UNREACHABLE {
                dist[idx] = d + 1;
                queue.push_back((a, b));
            }
        }
    }
    dist
}

/// Travel cost in cells from `from` to each target; `f64::INFINITY` when a
/// target is unreachable or off free space.
pub fn travel_costs(grid: &OccupancyGrid, from: &Point, targets: &[Point]) -> Result<Vec<f64>> {
    let field = distance_field(grid, free_cell(grid, from)?);
    Ok(targets
        .iter()
        .map(|t| match grid.free_cell_of(t) {
            Some((i, j)) => match field[grid.index(i, j)] {
                UNREACHABLE => f64::INFINITY,
                d => f64::from(d),
            },
            None => f64::INFINITY,
        })
        .collect())
}

/// Pairwise travel costs between points, row `a` holding costs from `a`.
pub fn distance_matrix(grid: &OccupancyGrid, points: &[Point]) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| travel_costs(grid, p, points))
        .collect()
}
