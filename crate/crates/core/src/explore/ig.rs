//! Information gain of a candidate point, estimated by reusing the particles
//! of the online filter and sampling single-word pseudo-observations.

use rand::Rng;

use crate::error::Result;
use crate::model::predictive::sample_index;
use crate::model::{BagOfWords, Hyperparameters, Point, ProposalTable, SufficientStats};
use crate::rbpf::{Particle, ParticleSet};

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn log_word_prob(stats: &SufficientStats, l: usize, g: usize, beta: f64) -> f64 {
    (f64::from(stats.n_word(l, g)) + beta).ln()
        - (f64::from(stats.n_word_total(l)) + stats.vocab_size() as f64 * beta).ln()
}

/// One particle's view of a fixed candidate position.
pub(crate) struct CandidateView<'a> {
    particle: &'a Particle,
    /// Position-only joint over `(l, k)`.
    table: ProposalTable,
    /// `sum_k table[l][k]`, scaled by `exp(-mass_shift)`.
    concept_mass: Vec<f64>,
    mass_shift: f64,
}

impl<'a> CandidateView<'a> {
    pub(crate) fn new(particle: &'a Particle, x: &Point, h: &Hyperparameters) -> Result<Self> {
        let table = particle.proposal(x, None, h)?;
        let log_mass: Vec<f64> = (0..table.concepts())
            .map(|l| log_sum_exp((0..table.posdists()).map(|k| table.log_value(l, k))))
            .collect();
        let mass_shift = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let concept_mass = log_mass.iter().map(|m| (m - mass_shift).exp()).collect();
        Ok(Self {
            particle,
            table,
            concept_mass,
            mass_shift,
        })
    }

    pub(crate) fn table(&self) -> &ProposalTable {
        &self.table
    }

    /// `log p(x_a, S_a = {g} | Z)`: the weight-increment marginal with the
    /// candidate position fixed and a one-token bag.
    pub(crate) fn log_marginal(&self, g: usize, beta: f64) -> f64 {
        let stats = self.particle.stats();
        let g_beta = stats.vocab_size() as f64 * beta;
        let sum: f64 = self
            .concept_mass
            .iter()
            .enumerate()
            .map(|(l, m)| {
                m * (f64::from(stats.n_word(l, g)) + beta)
                    / (f64::from(stats.n_word_total(l)) + g_beta)
            })
            .sum();
        self.mass_shift + sum.ln()
    }

    pub(crate) fn log_word_prob(&self, l: usize, g: usize, beta: f64) -> f64 {
        log_word_prob(self.particle.stats(), l, g, beta)
    }

    pub(crate) fn particle(&self) -> &Particle {
        self.particle
    }

    /// Draws `(C_a, i_a)` from the position-conditioned joint, then one word
    /// from that concept's smoothed word predictive.
    pub(crate) fn sample_word<R: Rng + ?Sized>(&self, beta: f64, rng: &mut R) -> usize {
        let a = self.table.sample(rng);
        let weights: Vec<f64> = self
            .particle
            .stats()
            .word_row(a.concept)
            .iter()
            .map(|&c| f64::from(c) + beta)
            .collect();
        sample_index(&weights, rng)
    }
}

/// One-token pseudo-observation drawn under a particle at `x_a`.
pub fn sample_pseudo_words<R: Rng + ?Sized>(
    particle: &Particle,
    x_a: &Point,
    h: &Hyperparameters,
    rng: &mut R,
) -> Result<BagOfWords> {
    let view = CandidateView::new(particle, x_a, h)?;
    Ok(BagOfWords::single(view.sample_word(h.beta, rng)))
}

/// Both forms of the Monte Carlo IG estimate for one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgEstimate {
    /// `(1/RJ) sum_r sum_j log[p(X|Z_r) / ((1/R) sum_r' p(X|Z_r'))]`, in nats.
    pub ig: f64,
    /// The same sum without the `1/RJ` and `1/R` factors.
    pub raw: f64,
}

/// Information gain of observing words at `x_a`, with particle weights taken
/// as `1/R` (the set is always freshly resampled).
pub fn information_gain<R: Rng + ?Sized>(
    set: &ParticleSet,
    x_a: &Point,
    pseudo_observations: usize,
    rng: &mut R,
) -> Result<IgEstimate> {
    let h = set.hyperparameters();
    let views = set
        .particles()
        .iter()
        .map(|p| CandidateView::new(p, x_a, h))
        .collect::<Result<Vec<_>>>()?;
    let r_count = views.len();
    let vocab = set.vocab_size();

    let mut draws = Vec::with_capacity(r_count * pseudo_observations);
    for view in &views {
        for _ in 0..pseudo_observations {
            draws.push(view.sample_word(h.beta, rng));
        }
    }

    // log p(X = g | Z_r) and log sum_r' p(X = g | Z_r') for the sampled words only.
    let mut marginals: Vec<Option<(Vec<f64>, f64)>> = vec![None; vocab];
    for &g in &draws {
        if marginals[g].is_none() {
            let per: Vec<f64> = views.iter().map(|v| v.log_marginal(g, h.beta)).collect();
            let lse = log_sum_exp(per.iter().copied());
            marginals[g] = Some((per, lse));
        }
    }

    let ln_r = (r_count as f64).ln();
    let mut raw = 0.0;
    for (i, &g) in draws.iter().enumerate() {
        let r = i / pseudo_observations;
        let (per, lse) = marginals[g].as_ref().expect("computed above");
        raw += per[r] - lse;
    }
    let n = (r_count * pseudo_observations) as f64;
    Ok(IgEstimate {
        ig: raw / n + ln_r,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, Observation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hyper(r: usize) -> Hyperparameters {
        Hyperparameters {
            concepts: 3,
            posdists: 3,
            particles: r,
            ..Hyperparameters::experiment_one()
        }
    }

    #[test]
    fn single_word_vocabulary() {
        let h = hyper(1);
        let p = Particle::empty(&h, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let bag = sample_pseudo_words(&p, &Point::new(1.0, 2.0), &h, &mut rng).unwrap();
            assert_eq!(bag, BagOfWords::single(0));
        }
    }

    #[test]
    fn one_particle_has_zero_gain() {
        let mut set = ParticleSet::new(hyper(1), 3, 1).unwrap();
        set.online_update(&Observation::new(
            Point::new(0.0, 0.0),
            BagOfWords::single(1),
        ))
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x in [Point::new(0.0, 0.0), Point::new(5.0, -2.0)] {
            assert_eq!(information_gain(&set, &x, 10, &mut rng).unwrap().ig, 0.0);
        }
    }

    #[test]
    fn identical_particles_have_zero_gain() {
        let h = hyper(6);
        let mut p = Particle::empty(&h, 3).unwrap();
        p.absorb(
            &Observation::new(Point::new(0.0, 0.0), BagOfWords::single(2)),
            Assignment::new(1, 0),
            &h,
        )
        .unwrap();
        let set = ParticleSet::from_particles(h, vec![p; 6], 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let est = information_gain(&set, &Point::new(0.5, 0.5), 20, &mut rng).unwrap();
        assert!(est.ig.abs() < 1e-12, "{}", est.ig);
    }
}
