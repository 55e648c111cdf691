//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatial_concepts::grid::{Cell, OccupancyGrid};
use spatial_concepts::model::Point;

/// Checks both candidate rules against every cell of the map and a ring of
/// off-map cells wide enough to cover the clearance.
pub fn sweep_oracle(grid: &OccupancyGrid, spacing: f64, clearance: f64) -> Vec<Point> {
    let res = grid.resolution();
    let o = grid.origin();
    let ring = (clearance / res) as i64 + 2;
    let mut out = Vec::new();
    let nx = (grid.width() as f64 * res / spacing).ceil() as usize + 1;
    let ny = (grid.height() as f64 * res / spacing).ceil() as usize + 1;
    for b in 0..ny {
        for a in 0..nx {
            let p = Point::new(o.x + a as f64 * spacing, o.y + b as f64 * spacing);
            let Some((ci, cj)) = grid.world_to_cell(&p) else {
                continue;
            };
            if grid.get(ci, cj) != Cell::Free {
                continue;
            }
            let mut ok = true;
            for j in -ring..grid.height() as i64 + ring {
                for i in -ring..grid.width() as i64 + ring {
                    if grid.get_signed(i, j) == Cell::Free {
                        continue;
                    }
                    let c = Point::new(o.x + (i as f64 + 0.5) * res, o.y + (j as f64 + 0.5) * res);
                    if (c - p).norm() <= clearance + 1e-9 {
                        ok = false;
                    }
                }
            }
            if ok {
                out.push(p);
            }
        }
    }
    out
}

pub fn dijkstra(grid: &OccupancyGrid, from: (usize, usize), to: (usize, usize)) -> Option<u32> {
    let mut dist = vec![u32::MAX; grid.width() * grid.height()];
    let mut heap = BinaryHeap::from([Reverse((0u32, from))]);
    dist[from.1 * grid.width() + from.0] = 0;
    while let Some(Reverse((d, (i, j)))) = heap.pop() {
        if (i, j) == to {
            return Some(d);
        }
        if d > dist[j * grid.width() + i] {
            continue;
        }
        let steps: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        for (di, dj) in steps {
            let (a, b) = (i as i64 + di, j as i64 + dj);
            if grid.get_signed(a, b) != Cell::Free {
                continue;
            }
            let idx = b as usize * grid.width() + a as usize;
            if d + 1 < dist[idx] {
                dist[idx] = d + 1;
                heap.push(Reverse((d + 1, (a as usize, b as usize))));
            }
        }
    }
    None
}

/// ARI from explicit agreement counts over all item pairs.
pub fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut total) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            total += 1;
            both += i128::from(sa && sb);
            only_a += i128::from(sa);
            only_b += i128::from(sb);
        }
    }
    let num = 2 * total * both - 2 * only_a * only_b;
    let den = total * (only_a + only_b) - 2 * only_a * only_b;
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Random obstacles and unknown patches on a free 60x50 map.
pub fn cluttered(seed: u64) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = OccupancyGrid::new(60, 50, 0.05, [-0.3, 0.2], Cell::Free).unwrap();
    for _ in 0..12 {
        let (x, y) = (rng.random_range(0..60), rng.random_range(0..50));
        let (w, h) = (rng.random_range(1..12), rng.random_range(1..12));
        let kind = if rng.random_bool(0.7) {
            Cell::Occupied
        } else {
            Cell::Unknown
        };
        for j in y..(y + h).min(50) {
            for i in x..(x + w).min(60) {
                g.set(i, j, kind);
            }
        }
    }
    g
}
