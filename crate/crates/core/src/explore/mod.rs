//! Destination selection: information gain (optionally traded off against
//! travel cost), its entropy-based counterpart, and baseline policies.

mod entropy;
mod ig;

pub use entropy::{entropy_score, EntropyScore};
pub use ig::{information_gain, sample_pseudo_words, IgEstimate};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;
use crate::rbpf::ParticleSet;
use crate::rng::{self, tag};

/// How the next question point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Maximize information gain.
    Spcoae,
    /// Maximize information gain minus `eta` times travel cost.
    SpcoaeCost,
    /// Uniform over eligible candidates.
    Random,
    /// Nearest candidate by path length.
    TravelCost,
    /// Minimize information gain.
    IgMin,
    /// Minimize expected posterior entropy after a one-step update.
    Entropy,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::Spcoae,
        Policy::SpcoaeCost,
        Policy::Random,
        Policy::TravelCost,
        Policy::IgMin,
        Policy::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Spcoae => "spcoae",
            Policy::SpcoaeCost => "spcoae_cost",
            Policy::Random => "random",
            Policy::TravelCost => "travel_cost",
            Policy::IgMin => "ig_min",
            Policy::Entropy => "entropy",
        }
    }

    /// Which score the policy reads from the candidate table.
    pub fn scoring(self) -> Scoring {
        match self {
            Policy::Spcoae | Policy::SpcoaeCost | Policy::IgMin => Scoring::InformationGain,
            Policy::Entropy => Scoring::Entropy,
            Policy::Random | Policy::TravelCost => Scoring::None,
        }
    }

    /// Travel-cost weight that enters the utility column.
    pub fn eta(self, eta: f64) -> f64 {
        match self {
            Policy::SpcoaeCost => eta,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scoring {
    InformationGain,
    Entropy,
    None,
}

/// Where the robot is and which candidates it has already asked at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationState {
    /// Visited candidate ids in visit order (repeats only in revisit mode).
    pub visited: Vec<usize>,
    pub current_pose: [f64; 2],
    pub revisit_mode: bool,
    pub step_budget: usize,
}

impl ExplorationState {
    pub fn new(start: Point, revisit_mode: bool, step_budget: usize) -> Self {
        Self {
            visited: Vec::new(),
            current_pose: [start.x, start.y],
            revisit_mode,
            step_budget,
        }
    }

    pub fn pose(&self) -> Point {
        Point::new(self.current_pose[0], self.current_pose[1])
    }

    /// Candidate ids that may be chosen next.
    pub fn eligible(&self, candidate_count: usize) -> Vec<usize> {
        if self.revisit_mode {
            return (0..candidate_count).collect();
        }
        let seen: BTreeSet<usize> = self.visited.iter().copied().collect();
        (0..candidate_count).filter(|c| !seen.contains(c)).collect()
    }

    pub fn visit(&mut self, candidate: usize, position: Point) {
        self.visited.push(candidate);
        self.current_pose = [position.x, position.y];
    }
}

/// One row of the per-step candidate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgRow {
    pub candidate: usize,
    pub x: f64,
    pub y: f64,
    /// Information gain in nats. For the entropy policy this holds the
    /// negated expected posterior entropy; for policies that do not score
    /// candidates it is NaN.
    pub ig: f64,
    /// A* path length from the current pose, in grid cells.
    pub travel_cost: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IgTable {
    pub rows: Vec<IgRow>,
}

impl IgTable {
    pub fn max_ig(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.ig)
            .filter(|v| !v.is_nan())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn row(&self, candidate: usize) -> Option<&IgRow> {
        self.rows.iter().find(|r| r.candidate == candidate)
    }
}

/// Scores every eligible, reachable candidate.
///
/// Each candidate draws from its own substream `(seed, step, candidate)`, so
/// the table does not depend on evaluation order or worker count.
#[allow(clippy::too_many_arguments)]
pub fn score_candidates(
    set: &ParticleSet,
    candidates: &[Point],
    eligible: &[usize],
    travel: &[f64],
    scoring: Scoring,
    eta: f64,
    seed: u64,
    step: u64,
) -> Result<IgTable> {
    let j = set.hyperparameters().pseudo_observations;
    let rows = eligible
        .par_iter()
        .filter(|&&c| travel[c].is_finite())
        .map(|&c| {
            let x = candidates[c];
            let ig = match scoring {
                // No word can be observed yet.
                Scoring::InformationGain | Scoring::Entropy if set.vocab_size() == 0 => 0.0,
                Scoring::InformationGain => {
                    let mut rng = rng::substream(seed, tag::PSEUDO_WORDS, step, c as u64);
                    information_gain(set, &x, j, &mut rng)?.ig
                }
                Scoring::Entropy => {
                    let mut rng = rng::substream(seed, tag::ENTROPY, step, c as u64);
                    -entropy_score(set, &x, j, &mut rng)?.total()
                }
                Scoring::None => f64::NAN,
            };
            let utility = if ig.is_nan() {
                -eta * travel[c]
            } else {
                ig - eta * travel[c]
            };
            Ok(IgRow {
                candidate: c,
                x: x.x,
                y: x.y,
                ig,
                travel_cost: travel[c],
                utility,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IgTable { rows })
}

fn arg_best(table: &IgTable, key: impl Fn(&IgRow) -> f64, maximize: bool) -> Result<usize> {
    let mut best: Option<&IgRow> = None;
    for row in &table.rows {
        let v = key(row);
        if v.is_nan() {
            continue;
        }
        best = match best {
            None => Some(row),
            Some(b) => {
                let bv = key(b);
                let better = if maximize { v > bv } else { v < bv };
                if better || (v == bv && row.candidate < b.candidate) {
                    Some(row)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.map(|r| r.candidate).ok_or(Error::ExplorationComplete)
}

/// Candidate maximizing `ig - eta * travel_cost`; lowest id on ties.
pub fn select_destination(table: &IgTable) -> Result<usize> {
    arg_best(table, |r| r.utility, true)
}

/// Baseline destination rules; `policy` must be one of the baselines.
pub fn baseline_policy<R: Rng + ?Sized>(
    policy: Policy,
    table: &IgTable,
    rng: &mut R,
) -> Result<usize> {
    match policy {
        Policy::Random => {
            if table.rows.is_empty() {
                return Err(Error::ExplorationComplete);
            }
            let mut ids: Vec<usize> = table.rows.iter().map(|r| r.candidate).collect();
            ids.sort_unstable();
            Ok(ids[rng.random_range(0..ids.len())])
        }
        Policy::TravelCost => arg_best(table, |r| r.travel_cost, false),
        Policy::IgMin => arg_best(table, |r| r.ig, false),
        other => Err(Error::Config(format!("{other} is not a baseline policy"))),
    }
}

/// Applies `policy` to a scored table.
pub fn choose<R: Rng + ?Sized>(policy: Policy, table: &IgTable, rng: &mut R) -> Result<usize> {
    match policy {
        Policy::Spcoae | Policy::SpcoaeCost | Policy::Entropy => select_destination(table),
        baseline => baseline_policy(baseline, table, rng),
    }
}
