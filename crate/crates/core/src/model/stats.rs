use serde::{Deserialize, Serialize};

use super::{Assignment, Mat2, Observation, Point};
use crate::error::{Error, Result};

/// Counts and running sums summarizing one particle's assignment history.
///
/// Matrices indexed by concept are stored row-major: `[l * K + k]` and
/// `[l * G + g]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    concepts: usize,
    posdists: usize,
    vocab_size: usize,
    total: u32,
    n_concept: Vec<u32>,
    n_concept_posdist: Vec<u32>,
    n_word: Vec<u32>,
    n_word_total: Vec<u32>,
    n_posdist: Vec<u32>,
    sum_x: Vec<Point>,
    sum_xxt: Vec<Mat2>,
}

impl SufficientStats {
    pub fn new(concepts: usize, posdists: usize, vocab_size: usize) -> Self {
        Self {
            concepts,
            posdists,
            vocab_size,
            total: 0,
            n_concept: vec![0; concepts],
            n_concept_posdist: vec![0; concepts * posdists],
            n_word: vec![0; concepts * vocab_size],
            n_word_total: vec![0; concepts],
            n_posdist: vec![0; posdists],
            sum_x: vec![Point::zeros(); posdists],
            sum_xxt: vec![Mat2::zeros(); posdists],
        }
    }

    /// Recount from scratch.
    pub fn from_assignments(
        concepts: usize,
        posdists: usize,
        vocab_size: usize,
        observations: &[Observation],
        assignments: &[Assignment],
    ) -> Result<Self> {
        if observations.len() != assignments.len() {
            return Err(Error::LengthMismatch {
                left: observations.len(),
                right: assignments.len(),
            });
        }
        let mut stats = Self::new(concepts, posdists, vocab_size);
        for (obs, &a) in observations.iter().zip(assignments) {
            stats.add(obs, a)?;
        }
        Ok(stats)
    }

    fn check_assignment(&self, a: Assignment) -> Result<()> {
        if a.concept >= self.concepts {
            return Err(Error::OutOfRange {
                what: "concept",
                index: a.concept,
                limit: self.concepts,
            });
        }
        if a.posdist >= self.posdists {
            return Err(Error::OutOfRange {
                what: "posdist",
                index: a.posdist,
                limit: self.posdists,
            });
        }
        Ok(())
    }

    /// Absorbs one observation under the given assignment.
    pub fn add(&mut self, obs: &Observation, a: Assignment) -> Result<()> {
        self.check_assignment(a)?;
        obs.words.check_vocab(self.vocab_size)?;
        let (l, k) = (a.concept, a.posdist);
        let x = obs.point();
        self.total += 1;
        self.n_concept[l] += 1;
        self.n_concept_posdist[l * self.posdists + k] += 1;
        self.n_posdist[k] += 1;
        for (g, c) in obs.words.iter() {
            self.n_word[l * self.vocab_size + g] += c;
            self.n_word_total[l] += c;
        }
        self.sum_x[k] += x;
        self.sum_xxt[k] += x * x.transpose();
        Ok(())
    }

    /// Zero-extends every word-count row to a larger vocabulary.
    pub fn grow_vocab(&mut self, vocab_size: usize) {
        if vocab_size <= self.vocab_size {
            return;
        }
        let mut n_word = vec![0; self.concepts * vocab_size];
        for l in 0..self.concepts {
            let old = &self.n_word[l * self.vocab_size..(l + 1) * self.vocab_size];
            n_word[l * vocab_size..l * vocab_size + self.vocab_size].copy_from_slice(old);
        }
        self.n_word = n_word;
        self.vocab_size = vocab_size;
    }

    pub fn concepts(&self) -> usize {
        self.concepts
    }

    pub fn posdists(&self) -> usize {
        self.posdists
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn n_concept(&self, l: usize) -> u32 {
        self.n_concept[l]
    }

    pub fn n_concept_posdist(&self, l: usize, k: usize) -> u32 {
        self.n_concept_posdist[l * self.posdists + k]
    }

    pub fn n_word(&self, l: usize, g: usize) -> u32 {
        self.n_word[l * self.vocab_size + g]
    }

    pub fn word_row(&self, l: usize) -> &[u32] {
        &self.n_word[l * self.vocab_size..(l + 1) * self.vocab_size]
    }

    pub fn n_word_total(&self, l: usize) -> u32 {
        self.n_word_total[l]
    }

    pub fn n_posdist(&self, k: usize) -> u32 {
        self.n_posdist[k]
    }

    pub fn sum_x(&self, k: usize) -> Point {
        self.sum_x[k]
    }

    pub fn sum_xxt(&self, k: usize) -> Mat2 {
        self.sum_xxt[k]
    }

    /// Verifies the marginal-count identities that tie the tables together.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Numerical(format!("stats invariant: {msg}")));
        let concept_sum: u32 = self.n_concept.iter().sum();
        if concept_sum != self.total {
            return fail(format!(
                "sum of concept counts {concept_sum} != {}",
                self.total
            ));
        }
        for l in 0..self.concepts {
            let row: u32 = (0..self.posdists)
                .map(|k| self.n_concept_posdist(l, k))
                .sum();
            if row != self.n_concept[l] {
                return fail(format!("concept {l} posdist row sums to {row}"));
            }
            let words: u32 = self.word_row(l).iter().sum();
            if words != self.n_word_total[l] {
                return fail(format!("concept {l} word total mismatch"));
            }
        }
        for k in 0..self.posdists {
            let col: u32 = (0..self.concepts)
                .map(|l| self.n_concept_posdist(l, k))
                .sum();
            if col != self.n_posdist[k] {
                return fail(format!("posdist {k} column sums to {col}"));
            }
            let s = self.sum_xxt[k];
            if (s[(0, 1)] - s[(1, 0)]).abs() > 1e-9 * (1.0 + s.abs().max()) {
                return fail(format!("posdist {k} scatter not symmetric"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BagOfWords;

    fn obs(x: f64, y: f64, w: &[usize]) -> Observation {
        Observation::new(
            Point::new(x, y),
            BagOfWords::from_indices(w.iter().copied()),
        )
    }

    #[test]
    fn incremental_matches_batch() {
        let data = [
            obs(0.1, 0.2, &[0]),
            obs(1.5, -0.4, &[1, 1]),
            obs(2.0, 3.0, &[2]),
            obs(-1.0, 0.5, &[0, 2]),
            obs(0.3, 0.3, &[1]),
        ];
        let assign = [
            Assignment::new(0, 1),
            Assignment::new(1, 1),
            Assignment::new(0, 2),
            Assignment::new(2, 0),
            Assignment::new(1, 1),
        ];
        let mut inc = SufficientStats::new(3, 3, 3);
        for (o, &a) in data.iter().zip(&assign) {
            inc.add(o, a).unwrap();
            inc.check_invariants().unwrap();
        }
        let batch = SufficientStats::from_assignments(3, 3, 3, &data, &assign).unwrap();
        assert_eq!(inc, batch);
        assert_eq!(inc.n_posdist(1), 3);
        assert_eq!(inc.n_word(1, 1), 3);
        assert_eq!(inc.n_word_total(0), 2);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut s = SufficientStats::new(2, 2, 2);
        assert!(s.add(&obs(0.0, 0.0, &[0]), Assignment::new(2, 0)).is_err());
        assert!(s.add(&obs(0.0, 0.0, &[0]), Assignment::new(0, 2)).is_err());
        assert!(s.add(&obs(0.0, 0.0, &[2]), Assignment::new(0, 0)).is_err());
        assert_eq!(s.total(), 0);
    }

    #[test]
    fn grow_vocab_preserves_counts() {
        let mut s = SufficientStats::new(2, 1, 2);
        s.add(&obs(0.0, 0.0, &[1]), Assignment::new(1, 0)).unwrap();
        s.grow_vocab(4);
        assert_eq!(s.vocab_size(), 4);
        assert_eq!(s.word_row(1), &[0, 1, 0, 0]);
        assert_eq!(s.word_row(0), &[0, 0, 0, 0]);
        s.check_invariants().unwrap();
    }
}
