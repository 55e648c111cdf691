//! Sequential importance resampling over latent assignments, with the
//! continuous parameters integrated out analytically.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    expected_params, Assignment, BagOfWords, Hyperparameters, ModelParams, NiwPosterior,
    Observation, Point, ProposalTable, StudentT, SufficientStats,
};
use crate::model::{niw_posterior, predictive};
use crate::rng::{self, tag};

struct HistoryNode {
    assignment: Assignment,
    prev: Option<Arc<HistoryNode>>,
}

impl Drop for HistoryNode {
    // Unlink iteratively so long uniquely-owned chains do not recurse.
    fn drop(&mut self) {
        let mut next = self.prev.take();
        while let Some(node) = next {
            match Arc::try_unwrap(node) {
                Ok(mut inner) => next = inner.prev.take(),
                Err(_) => break,
            }
        }
    }
}

/// Persistent assignment history; clones share their common prefix.
#[derive(Clone, Default)]
pub struct History {
    head: Option<Arc<HistoryNode>>,
    len: usize,
}

impl History {
    pub fn push(&mut self, assignment: Assignment) {
        let prev = self.head.take();
        self.head = Some(Arc::new(HistoryNode { assignment, prev }));
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Assignments in observation order.
    pub fn to_vec(&self) -> Vec<Assignment> {
        let mut out = Vec::with_capacity(self.len);
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            out.push(node.assignment);
            cur = node.prev.as_deref();
        }
        out.reverse();
        out
    }
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.to_vec()).finish()
    }
}

/// One posterior hypothesis over the assignment history.
#[derive(Clone, Debug)]
pub struct Particle {
    history: History,
    stats: Arc<SufficientStats>,
    predictives: Arc<Vec<StudentT>>,
    log_prior: Arc<Vec<f64>>,
    params: Arc<ModelParams>,
    weight: f64,
}

impl Particle {
    /// A particle that has seen no data.
    pub fn empty(h: &Hyperparameters, vocab_size: usize) -> Result<Self> {
        let stats = SufficientStats::new(h.concepts, h.posdists, vocab_size);
        Self::from_parts(History::default(), stats, h, 1.0)
    }

    fn from_parts(
        history: History,
        stats: SufficientStats,
        h: &Hyperparameters,
        weight: f64,
    ) -> Result<Self> {
        let predictives = predictive::predictives(&stats, h)?;
        let params = expected_params(&stats, h)?;
        Ok(Self {
            history,
            log_prior: Arc::new(predictive::log_prior_table(&stats, h)),
            stats: Arc::new(stats),
            predictives: Arc::new(predictives),
            params: Arc::new(params),
            weight,
        })
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Cached posterior predictive of every position distribution.
    pub fn predictives(&self) -> &[StudentT] {
        &self.predictives
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Same particle with an unnormalized weight, for building sets by hand.
    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn assignments(&self) -> Vec<Assignment> {
        self.history.to_vec()
    }

    pub fn posterior(&self, k: usize, h: &Hyperparameters) -> Result<NiwPosterior> {
        niw_posterior(k, &self.stats, h)
    }

    /// Joint proposal over `(C, i)` for a new point, using the cached predictives.
    pub fn proposal(
        &self,
        x: &Point,
        words: Option<&BagOfWords>,
        h: &Hyperparameters,
    ) -> Result<ProposalTable> {
        predictive::proposal_with(x, words, &self.stats, &self.predictives, &self.log_prior, h)
    }

    /// Adds the observation under `assignment` and refreshes the affected
    /// predictive and the posterior-mean parameters.
    pub fn absorb(
        &mut self,
        obs: &Observation,
        assignment: Assignment,
        h: &Hyperparameters,
    ) -> Result<()> {
        let stats = Arc::make_mut(&mut self.stats);
        stats.add(obs, assignment)?;
        if cfg!(debug_assertions) {
            stats.check_invariants()?;
        }
        let k = assignment.posdist;
        let refreshed = StudentT::predictive(&niw_posterior(k, stats, h)?)?;
        Arc::make_mut(&mut self.predictives)[k] = refreshed;
        self.log_prior = Arc::new(predictive::log_prior_table(stats, h));
        self.params = Arc::new(expected_params(stats, h)?);
        self.history.push(assignment);
        Ok(())
    }

    fn grow_vocab(&mut self, vocab_size: usize, h: &Hyperparameters) -> Result<()> {
        if vocab_size > self.stats.vocab_size() {
            Arc::make_mut(&mut self.stats).grow_vocab(vocab_size);
            self.params = Arc::new(expected_params(&self.stats, h)?);
        }
        Ok(())
    }
}

/// A drawn assignment together with the particle's weight increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub assignment: Assignment,
    /// Log of the unnormalized proposal-table sum.
    pub log_increment: f64,
}

/// Draws `(C_n, i_n)` from the normalized joint proposal and keeps the table
/// sum for the importance weight.
pub fn propose_assignment<R: Rng + ?Sized>(
    particle: &Particle,
    obs: &Observation,
    h: &Hyperparameters,
    rng: &mut R,
) -> Result<Proposal> {
    let table = particle.proposal(&obs.point(), Some(&obs.words), h)?;
    Ok(Proposal {
        assignment: table.sample(rng),
        log_increment: table.log_total(),
    })
}

/// Marginal predictive `p(x_n, S_n | history)` of a particle, evaluated before
/// the observation is absorbed.
pub fn importance_weight(
    particle: &Particle,
    obs: &Observation,
    h: &Hyperparameters,
) -> Result<f64> {
    Ok(particle
        .proposal(&obs.point(), Some(&obs.words), h)?
        .total())
}

/// Low-variance resampling: one uniform offset, `R` evenly spaced pointers.
pub fn systematic_indices(weights: &[f64], offset: f64) -> Vec<usize> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0] / total;
    let mut i = 0;
    for m in 0..n {
        let u = (offset + m as f64) / n as f64;
        while u >= cumulative && i + 1 < n {
            i += 1;
            cumulative += weights[i] / total;
        }
        out.push(i);
    }
    out
}

/// What happened during one filter step, before resampling.
#[derive(Debug, Clone)]
pub struct UpdateReport {
    pub assignments: Vec<Assignment>,
    pub log_increments: Vec<f64>,
    /// Normalized importance weights before resampling.
    pub weights: Vec<f64>,
    /// Source particle of every resampled slot.
    pub ancestors: Vec<usize>,
}

/// The particle approximation of the posterior over assignment histories.
#[derive(Clone, Debug)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    hyper: Arc<Hyperparameters>,
    step: usize,
    seed: u64,
    best: usize,
}

impl ParticleSet {
    pub fn new(h: Hyperparameters, vocab_size: usize, seed: u64) -> Result<Self> {
        h.validate()?;
        let mut proto = Particle::empty(&h, vocab_size)?;
        proto.weight = 1.0 / h.particles as f64;
        Ok(Self {
            particles: vec![proto; h.particles],
            hyper: Arc::new(h),
            step: 0,
            seed,
            best: 0,
        })
    }

    /// Builds a set from explicit particles; weights are renormalized.
    pub fn from_particles(
        h: Hyperparameters,
        particles: Vec<Particle>,
        step: usize,
        seed: u64,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Snapshot("empty particle set".into()));
        }
        if particles.iter().any(|p| p.history.len() != step) {
            return Err(Error::Snapshot("history length differs from step".into()));
        }
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        let mut particles = particles;
        for p in &mut particles {
            p.weight /= total;
        }
        let best = argmax(&particles.iter().map(|p| p.weight).collect::<Vec<_>>());
        Ok(Self {
            particles,
            hyper: Arc::new(h),
            step,
            seed,
            best,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    /// Number of observations absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vocab_size(&self) -> usize {
        self.particles[0].stats.vocab_size()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    /// A slot descended from the heaviest particle of the last update.
    pub fn best(&self) -> &Particle {
        &self.particles[self.best]
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    /// Zero-extends every particle's word counts to `vocab_size`.
    pub fn grow_vocab(&mut self, vocab_size: usize) -> Result<()> {
        let h = self.hyper.clone();
        self.particles
            .par_iter_mut()
            .try_for_each(|p| p.grow_vocab(vocab_size, &h))
    }

    /// Absorbs one observation: propose and weight every particle, resample,
    /// and reset all weights to `1/R`.
    pub fn online_update(&mut self, obs: &Observation) -> Result<UpdateReport> {
        let h = self.hyper.clone();
        let step = self.step as u64;
        let seed = self.seed;
        let proposals: Vec<Proposal> = self
            .particles
            .par_iter_mut()
            .enumerate()
            .map(|(r, particle)| {
                let mut rng = rng::substream(seed, tag::PROPOSAL, step, r as u64);
                let proposal = propose_assignment(particle, obs, &h, &mut rng)?;
                particle.absorb(obs, proposal.assignment, &h)?;
                Ok(proposal)
            })
            .collect::<Result<_>>()?;

        let log_w: Vec<f64> = self
            .particles
            .iter()
            .zip(&proposals)
            .map(|(p, q)| p.weight.ln() + q.log_increment)
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numerical("all particle weights vanished".into()));
        }
        let unnorm: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
        let total: f64 = unnorm.iter().sum();
        let weights: Vec<f64> = unnorm.iter().map(|w| w / total).collect();

        let mut rng = rng::substream(seed, tag::RESAMPLE, step, 0);
        let ancestors = systematic_indices(&weights, rng.random::<f64>());
        let heaviest = argmax(&weights);
        let uniform = 1.0 / self.particles.len() as f64;
        let particles = ancestors
            .iter()
            .map(|&a| {
                let mut p = self.particles[a].clone();
                p.weight = uniform;
                p
            })
            .collect();
        self.particles = particles;
        self.best = ancestors.iter().position(|&a| a == heaviest).unwrap_or(0);
        self.step += 1;
        Ok(UpdateReport {
            assignments: proposals.iter().map(|p| p.assignment).collect(),
            log_increments: proposals.iter().map(|p| p.log_increment).collect(),
            weights,
            ancestors,
        })
    }

    /// Re-weights and resamples an existing set with an external RNG; exposed
    /// for tests of the resampling step.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let weights = self.weights();
        let ancestors = systematic_indices(&weights, rng.random::<f64>());
        let uniform = 1.0 / self.particles.len() as f64;
        let heaviest = argmax(&weights);
        Self {
            particles: ancestors
                .iter()
                .map(|&a| {
                    let mut p = self.particles[a].clone();
                    p.weight = uniform;
                    p
                })
                .collect(),
            hyper: self.hyper.clone(),
            step: self.step,
            seed: self.seed,
            best: ancestors.iter().position(|&a| a == heaviest).unwrap_or(0),
        }
    }

    /// Serializable view of the whole set.
    pub fn snapshot(&self) -> ParticleSetSnapshot {
        ParticleSetSnapshot {
            step: self.step,
            seed: self.seed,
            best: self.best,
            hyperparameters: (*self.hyper).clone(),
            particles: self
                .particles
                .iter()
                .map(|p| ParticleSnapshot {
                    weight: p.weight,
                    assignments: p.assignments(),
                    stats: (*p.stats).clone(),
                    params: (*p.params).clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a set from a snapshot. Stats are checked for internal
    /// consistency; parameters and caches are recomputed from them.
    pub fn from_snapshot(snap: &ParticleSetSnapshot) -> Result<Self> {
        let h = snap.hyperparameters.clone();
        h.validate()?;
        let particles = snap
            .particles
            .iter()
            .map(|p| {
                if p.assignments.len() != snap.step || p.stats.total() as usize != snap.step {
                    return Err(Error::Snapshot(
                        "particle history length differs from step".into(),
                    ));
                }
                p.stats.check_invariants()?;
                let mut history = History::default();
                for &a in &p.assignments {
                    history.push(a);
                }
                Particle::from_parts(history, p.stats.clone(), &h, p.weight)
            })
            .collect::<Result<Vec<_>>>()?;
        if particles.len() != h.particles {
            return Err(Error::Snapshot(format!(
                "{} particles stored, hyperparameters say {}",
                particles.len(),
                h.particles
            )));
        }
        let mut set = Self::from_particles(h, particles, snap.step, snap.seed)?;
        if snap.best < set.len() {
            set.best = snap.best;
        }
        Ok(set)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSnapshot {
    pub weight: f64,
    pub assignments: Vec<Assignment>,
    pub stats: SufficientStats,
    pub params: ModelParams,
}

/// JSON document form of a particle set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSetSnapshot {
    pub step: usize,
    pub seed: u64,
    pub best: usize,
    pub hyperparameters: Hyperparameters,
    pub particles: Vec<ParticleSnapshot>,
}
