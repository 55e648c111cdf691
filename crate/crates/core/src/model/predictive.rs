use rand::Rng;

use super::{
    niw_posterior, Assignment, BagOfWords, Hyperparameters, Point, StudentT, SufficientStats,
};
use crate::error::{Error, Result};

/// Log of the smoothed multinomial predictive of a bag of words under concept `l`.
pub fn log_word_predictive(
    words: &BagOfWords,
    l: usize,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> Result<f64> {
    words.check_vocab(stats.vocab_size())?;
    if l >= stats.concepts() {
        return Err(Error::OutOfRange {
            what: "concept",
            index: l,
            limit: stats.concepts(),
        });
    }
    let denom = (f64::from(stats.n_word_total(l)) + stats.vocab_size() as f64 * h.beta).ln();
    Ok(words
        .iter()
        .map(|(g, c)| f64::from(c) * ((f64::from(stats.n_word(l, g)) + h.beta).ln() - denom))
        .sum())
}

pub fn word_predictive(
    words: &BagOfWords,
    l: usize,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> Result<f64> {
    log_word_predictive(words, l, stats, h).map(f64::exp)
}

/// Log weak-limit prior of `(C = l, i = k)` given the counts so far.
pub fn log_assignment_prior(
    l: usize,
    k: usize,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> f64 {
    let big_l = stats.concepts() as f64;
    let big_k = stats.posdists() as f64;
    let t_l = f64::from(stats.n_concept(l));
    let t_lk = f64::from(stats.n_concept_posdist(l, k));
    let t = f64::from(stats.total());
    (t_lk + h.gamma / big_k).ln() - (t_l + h.gamma).ln() + (t_l + h.alpha / big_l).ln()
        - (t + h.alpha).ln()
}

pub fn assignment_prior(l: usize, k: usize, stats: &SufficientStats, h: &Hyperparameters) -> f64 {
    log_assignment_prior(l, k, stats, h).exp()
}

/// Unnormalized joint proposal over `(concept, posdist)`, held in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalTable {
    concepts: usize,
    posdists: usize,
    log_values: Vec<f64>,
    /// `exp(log_values - log_max)`.
    weights: Vec<f64>,
    log_total: f64,
}

impl ProposalTable {
    fn from_log_values(concepts: usize, posdists: usize, log_values: Vec<f64>) -> Result<Self> {
        let log_max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !log_max.is_finite() {
            return Err(Error::Numerical(
                "proposal table has no finite entry".into(),
            ));
        }
        let weights: Vec<f64> = log_values.iter().map(|v| (v - log_max).exp()).collect();
        let sum: f64 = weights.iter().sum();
        Ok(Self {
            concepts,
            posdists,
            log_values,
            weights,
            log_total: log_max + sum.ln(),
        })
    }

    pub fn concepts(&self) -> usize {
        self.concepts
    }

    pub fn posdists(&self) -> usize {
        self.posdists
    }

    pub fn log_value(&self, l: usize, k: usize) -> f64 {
        self.log_values[l * self.posdists + k]
    }

    pub fn value(&self, l: usize, k: usize) -> f64 {
        self.log_value(l, k).exp()
    }

    /// Log of the sum over all entries: the particle's importance-weight increment.
    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    pub fn total(&self) -> f64 {
        self.log_total.exp()
    }

    /// Normalized table, row-major over `(l, k)`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_values
            .iter()
            .map(|v| (v - self.log_total).exp())
            .collect()
    }

    /// Inverse-CDF draw. The first index whose cumulative mass strictly exceeds
    /// the uniform variate wins.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let idx = sample_index(&self.weights, rng);
        Assignment::new(idx / self.posdists, idx % self.posdists)
    }

    /// Most probable entry; lowest flat index on ties.
    pub fn argmax(&self) -> Assignment {
        let mut best = 0;
        for (i, v) in self.log_values.iter().enumerate() {
            if *v > self.log_values[best] {
                best = i;
            }
        }
        Assignment::new(best / self.posdists, best % self.posdists)
    }
}

/// Inverse-CDF categorical draw over unnormalized nonnegative weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > u {
            return i;
        }
    }
    // Rounding left `u` at the very top; take the last positive entry.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Predictive Student-t of every position distribution.
pub(crate) fn predictives(stats: &SufficientStats, h: &Hyperparameters) -> Result<Vec<StudentT>> {
    (0..stats.posdists())
        .map(|k| StudentT::predictive(&niw_posterior(k, stats, h)?))
        .collect()
}

/// Log assignment prior of every `(l, k)`, row-major.
pub(crate) fn log_prior_table(stats: &SufficientStats, h: &Hyperparameters) -> Vec<f64> {
    (0..stats.concepts())
        .flat_map(|l| (0..stats.posdists()).map(move |k| log_assignment_prior(l, k, stats, h)))
        .collect()
}

/// Joint proposal with precomputed position predictives and log prior.
pub(crate) fn proposal_with(
    x: &Point,
    words: Option<&BagOfWords>,
    stats: &SufficientStats,
    preds: &[StudentT],
    log_prior: &[f64],
    h: &Hyperparameters,
) -> Result<ProposalTable> {
    let (big_l, big_k) = (stats.concepts(), stats.posdists());
    let pos: Vec<f64> = preds.iter().map(|t| t.ln_pdf(x)).collect();
    let mut log_values = Vec::with_capacity(big_l * big_k);
    for (l, prior_row) in log_prior.chunks_exact(big_k).enumerate() {
        let word = match words {
            Some(w) => log_word_predictive(w, l, stats, h)?,
            None => 0.0,
        };
        for (p, prior) in pos.iter().zip(prior_row) {
            log_values.push(p + word + prior);
        }
    }
    ProposalTable::from_log_values(big_l, big_k, log_values)
}

/// Position predictive x word predictive x assignment prior for every
/// `(l, k)`. Without words the word factor is 1.
pub fn joint_proposal_table(
    x: &Point,
    words: Option<&BagOfWords>,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> Result<ProposalTable> {
    proposal_with(
        x,
        words,
        stats,
        &predictives(stats, h)?,
        &log_prior_table(stats, h),
        h,
    )
}
