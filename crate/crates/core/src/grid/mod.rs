//! Occupancy grids, candidate points, travel costs and synthetic homes.

mod candidates;
mod occupancy;
mod path;
mod synth;

pub use candidates::{generate_candidates, CandidateSet, DEFAULT_CLEARANCE, DEFAULT_SPACING};
pub use occupancy::{load_map, Cell, MapMetadata, OccupancyGrid};
pub use path::{
    astar_cells, astar_path_length, distance_field, distance_matrix, travel_costs, UNREACHABLE,
};
pub use synth::{
    room_sentences, synth_environment, RoomLayout, SynthEnvironment, SynthSpec, PLACE_WORDS,
};
