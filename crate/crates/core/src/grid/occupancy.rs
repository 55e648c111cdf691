use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

/// Pixel values written when saving a map.
const FREE_PIXEL: u8 = 254;
const OCCUPIED_PIXEL: u8 = 0;
const UNKNOWN_PIXEL: u8 = 205;

/// Side-car metadata of a graymap: cell size, world origin of cell (0, 0) and
/// the pixel thresholds that classify cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub resolution: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    /// Pixels strictly below this value are occupied.
    pub occupied_thresh: u8,
    /// Pixels strictly above this value are free.
    pub free_thresh: u8,
}

impl Default for MapMetadata {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            origin_x: 0.0,
            origin_y: 0.0,
            occupied_thresh: 50,
            free_thresh: 250,
        }
    }
}

impl MapMetadata {
    /// Parses `key: value` or `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .or_else(|| line.split_once('='))
                .ok_or_else(|| Error::Map(format!("bad metadata line '{line}'")))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .ok_or_else(|| Error::Map(format!("metadata missing '{key}'")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Map(format!("metadata '{key}' is not a number")))
        };
        let byte = |key: &str| -> Result<u8> {
            get(key)?
                .parse()
                .map_err(|_| Error::Map(format!("metadata '{key}' must be 0..=255")))
        };
        let meta = Self {
            resolution: num("resolution")?,
            origin_x: num("origin_x")?,
            origin_y: num("origin_y")?,
            occupied_thresh: byte("occupied_thresh")?,
            free_thresh: byte("free_thresh")?,
        };
        if !(meta.resolution > 0.0 && meta.resolution.is_finite()) {
            return Err(Error::Map("resolution must be > 0".into()));
        }
        if meta.occupied_thresh > meta.free_thresh {
            return Err(Error::Map("occupied_thresh exceeds free_thresh".into()));
        }
        Ok(meta)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "resolution: {}", self.resolution);
        let _ = writeln!(s, "origin_x: {}", self.origin_x);
        let _ = writeln!(s, "origin_y: {}", self.origin_y);
        let _ = writeln!(s, "occupied_thresh: {}", self.occupied_thresh);
        let _ = writeln!(s, "free_thresh: {}", self.free_thresh);
        s
    }
}

/// 2-D occupancy grid. Cell `(i, j)` covers
/// `[origin + i*res, origin + (i+1)*res) x [origin + j*res, ...)`; `j` grows
/// upward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: [f64; 2],
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 2],
        fill: Cell,
    ) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::Map("resolution must be > 0".into()));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells: vec![fill; width * height],
        })
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 2],
        cells: Vec<Cell>,
    ) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::Map(format!(
                "{} cells for a {width}x{height} grid",
                cells.len()
            )));
        }
        let mut grid = Self::new(width, height, resolution, origin, Cell::Unknown)?;
        grid.cells = cells;
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        Point::new(self.origin[0], self.origin[1])
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[self.index(i, j)]
    }

    /// Cell lookup with signed indices; anything off the map is unknown.
    pub fn get_signed(&self, i: i64, j: i64) -> Cell {
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            Cell::Unknown
        } else {
            self.get(i as usize, j as usize)
        }
    }

    pub fn set(&mut self, i: usize, j: usize, cell: Cell) {
        let idx = self.index(i, j);
        self.cells[idx] = cell;
    }

    pub fn is_free(&self, i: usize, j: usize) -> bool {
        self.get(i, j) == Cell::Free
    }

    /// Cell containing a world point, if on the map.
    pub fn world_to_cell(&self, p: &Point) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin[0]) / self.resolution + 1e-9).floor();
        let fj = ((p.y - self.origin[1]) / self.resolution + 1e-9).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.width as f64 || fj >= self.height as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin[0] + (i as f64 + 0.5) * self.resolution,
            self.origin[1] + (j as f64 + 0.5) * self.resolution,
        )
    }

    pub fn free_cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        self.world_to_cell(p).filter(|&(i, j)| self.is_free(i, j))
    }

    /// Encodes the grid as a binary graymap, top row first.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                out.push(match self.get(i, j) {
                    Cell::Free => FREE_PIXEL,
                    Cell::Occupied => OCCUPIED_PIXEL,
                    Cell::Unknown => UNKNOWN_PIXEL,
                });
            }
        }
        out
    }

    pub fn metadata(&self) -> MapMetadata {
        MapMetadata {
            resolution: self.resolution,
            origin_x: self.origin[0],
            origin_y: self.origin[1],
            ..MapMetadata::default()
        }
    }
}

fn parse_header(bytes: &[u8]) -> Result<([usize; 3], usize)> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Map("not a binary graymap (missing P5)".into()));
    }
    let mut pos = 2;
    let mut values = [0usize; 3];
    for value in &mut values {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Map("truncated graymap header".into()));
        }
        *value = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Map("bad number in graymap header".into()))?;
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Map("graymap header not terminated".into()));
    }
    Ok((values, pos + 1))
}

/// Decodes a binary graymap into an occupancy grid.
pub fn load_map(image: &[u8], meta: &MapMetadata) -> Result<OccupancyGrid> {
    let ([width, height, maxval], start) = parse_header(image)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Map(format!("unsupported maxval {maxval}")));
    }
    let data = &image[start..];
    if data.len() != width * height {
        return Err(Error::Map(format!(
            "expected {} pixels, found {}",
            width * height,
            data.len()
        )));
    }
    let mut cells = vec![Cell::Unknown; width * height];
    for row in 0..height {
        let j = height - 1 - row;
        for i in 0..width {
            let px = data[row * width + i];
            cells[j * width + i] = if px > meta.free_thresh {
                Cell::Free
            } else if px < meta.occupied_thresh {
                Cell::Occupied
            } else {
                Cell::Unknown
            };
        }
    }
    OccupancyGrid::from_cells(
        width,
        height,
        meta.resolution,
        [meta.origin_x, meta.origin_y],
        cells,
    )
}
