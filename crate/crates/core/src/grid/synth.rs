use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::occupancy::{Cell, OccupancyGrid};
use crate::rng::{substream, tag};
use crate::teacher::{Annotation, Region, Shape};

/// Place words assigned to generated rooms, in preference order.
pub const PLACE_WORDS: [&str; 10] = [
    "Living_room",
    "Dining_room",
    "Kitchen",
    "Bedroom_A",
    "Bedroom_B",
    "Bedroom_C",
    "Corridor",
    "Toilet",
    "Bathroom",
    "Entrance",
];

/// Minimum distance between a doorway and a room corner, meters.
const DOOR_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub rooms: usize,
    /// Interior width range, meters.
    pub room_width: [f64; 2],
    /// Interior height range, meters.
    pub room_height: [f64; 2],
    pub resolution: f64,
    pub wall: f64,
    pub door: f64,
    /// Probability of a doorway on an adjacency outside the spanning tree.
    pub extra_door_prob: f64,
    /// Largest admissible map size, meters.
    pub max_extent: [f64; 2],
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            rooms: 8,
            room_width: [3.6, 4.4],
            room_height: [3.2, 4.0],
            resolution: 0.05,
            wall: 0.1,
            door: 0.9,
            extra_door_prob: 0.25,
            max_extent: [40.0, 40.0],
        }
    }
}

impl SynthSpec {
    pub fn with_rooms(rooms: usize) -> Self {
        Self {
            rooms,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Generation(m.to_string()));
        if self.rooms == 0 {
            return fail("at least one room is required");
        }
        if !(self.resolution > 0.0) || !(self.wall > 0.0) || !(self.door > 0.0) {
            return fail("resolution, wall and door must be > 0");
        }
        for r in [self.room_width, self.room_height] {
            if !(r[0] > 0.0 && r[0] <= r[1]) {
                return fail("room size range must satisfy 0 < min <= max");
            }
        }
        if !(0.0..=1.0).contains(&self.extra_door_prob) {
            return fail("extra_door_prob must be in [0, 1]");
        }
        Ok(())
    }
}

/// Geometry of one generated room, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomLayout {
    pub word: String,
    /// Free interior `[x_min, y_min, x_max, y_max]`.
    pub interior: [f64; 4],
    /// Annotated tile including half of the surrounding walls.
    pub tile: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthEnvironment {
    pub grid: OccupancyGrid,
    pub annotation: Annotation,
    pub rooms: Vec<RoomLayout>,
}

struct Features {
    name: &'static str,
    items: [&'static str; 4],
    description: &'static str,
}

fn features(word: &str) -> Features {
    let base = word.to_ascii_lowercase();
    let base = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let base = base
        .strip_suffix("_a")
        .or_else(|| base.strip_suffix("_b"))
        .or_else(|| base.strip_suffix("_c"))
        .unwrap_or(base);
    match base {
        "living_room" => Features {
            name: "living room",
            items: ["sofa", "television", "carpet", "armchair"],
            description: "The room where the family relaxes is called the living room.",
        },
        "dining_room" => Features {
            name: "dining room",
            items: ["table", "chair", "dinner", "plate"],
            description: "The room in which we eat dinner is called the dining room.",
        },
        "kitchen" => Features {
            name: "kitchen",
            items: ["stove", "refrigerator", "sink", "oven"],
            description: "The room in which we cook meals is called the kitchen.",
        },
        "bedroom" => Features {
            name: "bedroom",
            items: ["bed", "pillow", "wardrobe", "blanket"],
            description: "The room in which you sleep at night is called a bedroom.",
        },
        "corridor" => Features {
            name: "corridor",
            items: ["hallway", "door", "picture", "lamp"],
            description: "The corridor connects the rooms of the house.",
        },
        "toilet" => Features {
            name: "toilet",
            items: ["lavatory", "restroom", "paper", "flush"],
            description: "The small room with the lavatory is the toilet.",
        },
        "bathroom" => Features {
            name: "bathroom",
            items: ["bathtub", "shower", "towel", "mirror"],
            description: "The room in which you take a bath is called the bathroom.",
        },
        "entrance" => Features {
            name: "entrance",
            items: ["shoe", "umbrella", "doormat", "coat"],
            description: "The entrance is where you take off your shoes.",
        },
        _ => Features {
            name: "storage",
            items: ["box", "shelf", "tool", "cabinet"],
            description: "Things we rarely use are kept in the storage room.",
        },
    }
}

/// Sentence bank describing a room labelled `word`.
pub fn room_sentences(word: &str) -> Vec<String> {
    let f = features(word);
    let n = f.name;
    let mut out = vec![
        format!("This is the {n}."),
        format!("We are standing in the {n}."),
        format!("This place is called the {n}."),
        format!("Welcome to the {n}."),
        f.description.to_string(),
    ];
    for item in f.items {
        out.push(format!("There is a {item} in the {n}."));
        out.push(format!("You can find the {item} here."));
    }
    out
}

fn room_word(index: usize) -> String {
    PLACE_WORDS
        .get(index)
        .map(|w| w.to_string())
        .unwrap_or_else(|| format!("Storage_{}", index - PLACE_WORDS.len() + 1))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

fn cells(meters: f64, res: f64) -> usize {
    (meters / res).round().max(1.0) as usize
}

/// Rooms on a rows x cols lattice with randomized sizes. Walls are solid
/// except for doorways; a random spanning tree of doorways keeps every room
/// reachable.
pub fn synth_environment(seed: u64, spec: &SynthSpec) -> Result<SynthEnvironment> {
    spec.validate()?;
    let mut rng = substream(seed, tag::ENVIRONMENT, 0, 0);
    let res = spec.resolution;
    let n = spec.rooms;
    let rows = (n as f64).sqrt().floor() as usize;
    let cols = n.div_ceil(rows);
    let wall = cells(spec.wall, res);
    let door = cells(spec.door, res);
    let margin = (DOOR_MARGIN / res).ceil() as usize;

    let mut draw = |range: [f64; 2]| cells(rng.random_range(range[0]..=range[1]), res);
    let widths: Vec<usize> = (0..cols).map(|_| draw(spec.room_width)).collect();
    let heights: Vec<usize> = (0..rows).map(|_| draw(spec.room_height)).collect();
    if widths
        .iter()
        .chain(&heights)
        .any(|&s| s < door + 2 * margin)
    {
        return Err(Error::Generation(format!(
            "rooms narrower than a {} m doorway plus corner margins",
            spec.door
        )));
    }
    let starts = |sizes: &[usize]| -> Vec<usize> {
        sizes
            .iter()
            .scan(wall, |at, &s| {
                let start = *at;
                *at += s + wall;
                Some(start)
            })
            .collect()
    };
    let x0 = starts(&widths);
    let y0 = starts(&heights);
    let width = widths.iter().sum::<usize>() + (cols + 1) * wall;
    let height = heights.iter().sum::<usize>() + (rows + 1) * wall;
    if width as f64 * res > spec.max_extent[0] || height as f64 * res > spec.max_extent[1] {
        return Err(Error::Generation(format!(
            "{n} rooms need {:.2} x {:.2} m, limit {:?}",
            width as f64 * res,
            height as f64 * res,
            spec.max_extent
        )));
    }

    let mut grid = OccupancyGrid::new(width, height, res, [0.0, 0.0], Cell::Occupied)?;
    let carve =
        |grid: &mut OccupancyGrid, xs: std::ops::Range<usize>, ys: std::ops::Range<usize>| {
            for j in ys {
                for i in xs.clone() {
                    grid.set(i, j, Cell::Free);
                }
            }
        };
    let tile = |id: usize| (id / cols, id % cols);
    for id in 0..n {
        let (r, c) = tile(id);
        carve(
            &mut grid,
            x0[c]..x0[c] + widths[c],
            y0[r]..y0[r] + heights[r],
        );
    }

    let mut edges = Vec::new();
    for id in 0..n {
        let (r, c) = tile(id);
        if c + 1 < cols && id + 1 < n {
            edges.push((id, id + 1));
        }
        if (r + 1) * cols + c < n {
            edges.push((id, id + cols));
        }
    }
    edges.shuffle(&mut rng);
    let mut uf = UnionFind((0..n).collect());
    for (a, b) in edges {
        let in_tree = uf.union(a, b);
        if !in_tree && rng.random::<f64>() >= spec.extra_door_prob {
            continue;
        }
        let (ra, ca) = tile(a);
        if b == a + 1 {
            let offset = rng.random_range(margin..=heights[ra] - margin - door);
            let x = x0[ca] + widths[ca];
            let y = y0[ra] + offset;
            carve(&mut grid, x..x + wall, y..y + door);
        } else {
            let offset = rng.random_range(margin..=widths[ca] - margin - door);
            let x = x0[ca] + offset;
            let y = y0[ra] + heights[ra];
            carve(&mut grid, x..x + door, y..y + wall);
        }
    }

    let mut words: Vec<String> = (0..n).map(room_word).collect();
    words.shuffle(&mut rng);
    let bounds = |starts: &[usize], sizes: &[usize], total: usize| -> Vec<f64> {
        let mut b = vec![0.0];
        for &s in &starts[1..] {
            b.push((s as f64 - wall as f64 / 2.0) * res);
        }
        b.push(total as f64 * res);
        debug_assert_eq!(b.len(), sizes.len() + 1);
        b
    };
    let bx = bounds(&x0, &widths, width);
    let by = bounds(&y0, &heights, height);

    let mut rooms = Vec::with_capacity(n);
    let mut regions = Vec::with_capacity(n);
    for (id, word) in words.into_iter().enumerate() {
        let (r, c) = tile(id);
        let tile = [bx[c], by[r], bx[c + 1], by[r + 1]];
        let interior = [
            x0[c] as f64 * res,
            y0[r] as f64 * res,
            (x0[c] + widths[c]) as f64 * res,
            (y0[r] + heights[r]) as f64 * res,
        ];
        regions.push(Region {
            utterances: room_sentences(&word),
            shape: Shape::Rect {
                min: [tile[0], tile[1]],
                max: [tile[2], tile[3]],
            },
            word: word.clone(),
        });
        rooms.push(RoomLayout {
            word,
            interior,
            tile,
        });
    }
    Ok(SynthEnvironment {
        grid,
        annotation: Annotation::new(regions)?,
        rooms,
    })
}
