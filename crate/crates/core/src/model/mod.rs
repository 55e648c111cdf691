//! Generative model of spatial concepts and its closed-form conjugate
//! computations.
//!
//! A spatial concept `l` couples a word distribution `W_l` with a mixture
//! `phi_l` over position distributions; each position distribution `k` is a
//! 2-D Gaussian with a normal-inverse-Wishart prior. Both Dirichlet processes
//! are truncated to `L` concepts and `K` position distributions (weak limit).

mod entropy;
mod niw;
mod params;
pub(crate) mod predictive;
mod stats;

pub use entropy::{dirichlet_entropy, inverse_wishart_entropy, niw_entropy, parameter_entropy};
pub use niw::{niw_posterior, position_predictive, NiwPosterior, StudentT};
pub use params::{expected_params, ModelParams};
pub use predictive::{
    assignment_prior, joint_proposal_table, log_assignment_prior, log_word_predictive,
    word_predictive, ProposalTable,
};
pub use stats::SufficientStats;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the position space.
pub const DIM: usize = 2;

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Hyperparameters of the model and of the exploration loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    /// Concentration of the concept-level Dirichlet process.
    pub alpha: f64,
    /// Dirichlet pseudo-count of every word distribution.
    pub beta: f64,
    /// Concentration of the per-concept position-distribution process.
    pub gamma: f64,
    /// Prior mean of the position distributions, meters.
    pub m0: [f64; 2],
    pub kappa0: f64,
    /// Prior scale matrix, meters squared, row-major.
    pub v0: [[f64; 2]; 2],
    pub nu0: f64,
    /// Truncation level for concepts (`L`).
    pub concepts: usize,
    /// Truncation level for position distributions (`K`).
    pub posdists: usize,
    /// Number of particles (`R`).
    pub particles: usize,
    /// Pseudo-observations per particle and candidate (`J`).
    pub pseudo_observations: usize,
    /// Travel-cost weight in the utility.
    pub eta: f64,
}

impl Hyperparameters {
    /// Simulated-home setting: single words, ten candidate labels.
    pub fn experiment_one() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.01,
            gamma: 0.1,
            m0: [0.0, 0.0],
            kappa0: 0.001,
            v0: [[1.5, 0.0], [0.0, 1.5]],
            nu0: 4.0,
            concepts: 10,
            posdists: 10,
            particles: 1000,
            pseudo_observations: 10,
            eta: 0.005,
        }
    }

    /// Real-home setting: multiword sentences with revisiting.
    pub fn experiment_two() -> Self {
        Self {
            beta: 0.1,
            gamma: 0.01,
            v0: [[1.0, 0.0], [0.0, 1.0]],
            nu0: 5.0,
            ..Self::experiment_one()
        }
    }

    pub fn m0(&self) -> Point {
        Point::new(self.m0[0], self.m0[1])
    }

    pub fn v0(&self) -> Mat2 {
        Mat2::new(self.v0[0][0], self.v0[0][1], self.v0[1][0], self.v0[1][1])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidHyperparameters(msg.to_string()));
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("kappa0", self.kappa0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidHyperparameters(format!("{name} must be > 0")));
            }
        }
        if !(self.nu0 > (DIM as f64) - 1.0) {
            return bad("nu0 must exceed d - 1");
        }
        if self.m0.iter().any(|v| !v.is_finite()) {
            return bad("m0 must be finite");
        }
        let v0 = self.v0();
        if (v0 - v0.transpose()).abs().max() > 1e-12 || v0.cholesky().is_none() {
            return bad("V0 must be symmetric positive-definite");
        }
        if self.concepts == 0 || self.posdists == 0 {
            return bad("L and K must be at least 1");
        }
        if self.particles == 0 || self.pseudo_observations == 0 {
            return bad("R and J must be at least 1");
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta must be >= 0");
        }
        Ok(())
    }
}

/// Sparse word-count vector over vocabulary indices, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BagOfWords(Vec<(usize, u32)>);

impl BagOfWords {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(word: usize) -> Self {
        Self(vec![(word, 1)])
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bag = Self::new();
        for i in indices {
            bag.add(i, 1);
        }
        bag
    }

    pub fn add(&mut self, word: usize, count: u32) {
        if count == 0 {
            return;
        }
        match self.0.binary_search_by_key(&word, |&(w, _)| w) {
            Ok(pos) => self.0[pos].1 += count,
            Err(pos) => self.0.insert(pos, (word, count)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn count(&self, word: usize) -> u32 {
        self.0
            .binary_search_by_key(&word, |&(w, _)| w)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&(w, _)| w)
    }

    pub(crate) fn check_vocab(&self, vocab_size: usize) -> Result<()> {
        match self.max_index() {
            Some(index) if index >= vocab_size => Err(Error::Dimension { index, vocab_size }),
            _ => Ok(()),
        }
    }
}

/// One answered query: where the robot stood and what it was told.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub position: [f64; 2],
    pub words: BagOfWords,
    /// Number of tokens in the utterance. Kept for logging only.
    pub word_count: u32,
}

impl Observation {
    pub fn new(position: Point, words: BagOfWords) -> Self {
        let word_count = words.total();
        Self {
            position: [position.x, position.y],
            words,
            word_count,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.position[0], self.position[1])
    }
}

/// Latent labels of one observation: its concept and position distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub concept: usize,
    pub posdist: usize,
}

impl Assignment {
    pub fn new(concept: usize, posdist: usize) -> Self {
        Self { concept, posdist }
    }
}
