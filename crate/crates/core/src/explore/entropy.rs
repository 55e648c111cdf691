//! Entropy-based candidate scoring: run a one-step filter update on each
//! pseudo-observation and measure the expected posterior entropy.

use rand::Rng;

use super::ig::CandidateView;
use crate::error::Result;
use crate::model::{dirichlet_entropy, niw_entropy, Hyperparameters, Mat2, Point, SufficientStats};
use crate::rbpf::ParticleSet;

/// Per-component parameter entropies of one particle.
struct EntropyParts {
    pi: f64,
    phi: Vec<f64>,
    words: Vec<f64>,
    niw: Vec<f64>,
    total: f64,
}

fn pi_concentration(stats: &SufficientStats, h: &Hyperparameters) -> Vec<f64> {
    let big_l = stats.concepts() as f64;
    (0..stats.concepts())
        .map(|l| f64::from(stats.n_concept(l)) + h.alpha / big_l)
        .collect()
}

fn phi_concentration(stats: &SufficientStats, l: usize, h: &Hyperparameters) -> Vec<f64> {
    let big_k = stats.posdists() as f64;
    (0..stats.posdists())
        .map(|k| f64::from(stats.n_concept_posdist(l, k)) + h.gamma / big_k)
        .collect()
}

fn word_concentration(stats: &SufficientStats, l: usize, h: &Hyperparameters) -> Vec<f64> {
    stats
        .word_row(l)
        .iter()
        .map(|&c| f64::from(c) + h.beta)
        .collect()
}

fn word_entropy(conc: &[f64]) -> f64 {
    if conc.len() > 1 {
        dirichlet_entropy(conc)
    } else {
        0.0
    }
}

/// NIW posterior after adding `x` to a component with `n` points and the
/// given sums.
fn niw_entropy_with(n: f64, sum_x: Point, sum_xxt: Mat2, h: &Hyperparameters) -> f64 {
    let m0 = h.m0();
    let kappa = n + h.kappa0;
    let nu = h.nu0 + n;
    let m = (sum_x + m0 * h.kappa0) / kappa;
    let v = h.v0() + sum_xxt + m0 * m0.transpose() * h.kappa0 - m * m.transpose() * kappa;
    niw_entropy(kappa, nu, &v)
}

impl EntropyParts {
    fn new(stats: &SufficientStats, h: &Hyperparameters) -> Self {
        let pi = dirichlet_entropy(&pi_concentration(stats, h));
        let phi: Vec<f64> = (0..stats.concepts())
            .map(|l| dirichlet_entropy(&phi_concentration(stats, l, h)))
            .collect();
        let words: Vec<f64> = (0..stats.concepts())
            .map(|l| word_entropy(&word_concentration(stats, l, h)))
            .collect();
        let niw: Vec<f64> = (0..stats.posdists())
            .map(|k| {
                niw_entropy_with(
                    f64::from(stats.n_posdist(k)),
                    stats.sum_x(k),
                    stats.sum_xxt(k),
                    h,
                )
            })
            .collect();
        let total =
            pi + phi.iter().sum::<f64>() + words.iter().sum::<f64>() + niw.iter().sum::<f64>();
        Self {
            pi,
            phi,
            words,
            niw,
            total,
        }
    }

    /// Total parameter entropy after absorbing one token `g` at `x` under
    /// `(l, k)`.
    fn after(
        &self,
        stats: &SufficientStats,
        l: usize,
        k: usize,
        g: usize,
        x: &Point,
        h: &Hyperparameters,
    ) -> f64 {
        let mut pi = pi_concentration(stats, h);
        pi[l] += 1.0;
        let mut phi = phi_concentration(stats, l, h);
        phi[k] += 1.0;
        let mut words = word_concentration(stats, l, h);
        words[g] += 1.0;
        let niw = niw_entropy_with(
            f64::from(stats.n_posdist(k)) + 1.0,
            stats.sum_x(k) + x,
            stats.sum_xxt(k) + x * x.transpose(),
            h,
        );
        self.total - self.pi + dirichlet_entropy(&pi) - self.phi[l] + dirichlet_entropy(&phi)
            - self.words[l]
            + word_entropy(&words)
            - self.niw[k]
            + niw
    }
}

/// Components of the expected posterior entropy at one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyScore {
    /// Mean entropy of the particle weights after the one-step update.
    pub assignment: f64,
    /// Mean weight-averaged parameter entropy after the update.
    pub parameter: f64,
}

impl EntropyScore {
    /// Expected posterior entropy; lower is better.
    pub fn total(&self) -> f64 {
        self.assignment + self.parameter
    }
}

/// Expected entropy of the posterior after observing a pseudo-word at `x_a`.
///
/// For each particle `r` and draw `j`, a one-token pseudo-observation is
/// sampled under `r`; every particle is then advanced by one filter step on it
/// (an assignment drawn from its proposal, weight proportional to its table
/// sum). The entropy is that of the pre-resampling particle weights plus the
/// weight-averaged closed-form entropy of each particle's parameter posterior.
pub fn entropy_score<R: Rng + ?Sized>(
    set: &ParticleSet,
    x_a: &Point,
    pseudo_observations: usize,
    rng: &mut R,
) -> Result<EntropyScore> {
    let h = set.hyperparameters();
    let views = set
        .particles()
        .iter()
        .map(|p| CandidateView::new(p, x_a, h))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<EntropyParts> = set
        .particles()
        .iter()
        .map(|p| EntropyParts::new(p.stats(), h))
        .collect();

    let mut assignment_sum = 0.0;
    let mut parameter_sum = 0.0;
    let mut draws = 0usize;
    for view in &views {
        for _ in 0..pseudo_observations {
            let g = view.sample_word(h.beta, rng);
            let log_w: Vec<f64> = views.iter().map(|v| v.log_marginal(g, h.beta)).collect();
            let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let unnorm: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
            let total: f64 = unnorm.iter().sum();

            let mut h_assign = 0.0;
            let mut h_param = 0.0;
            for ((other, part), u) in views.iter().zip(&parts).zip(&unnorm) {
                let w = u / total;
                if w > 0.0 {
                    h_assign -= w * w.ln();
                }
                let stats = other.particle().stats();
                let a = sample_with_word(other, g, h.beta, rng);
                h_param += w * part.after(stats, a.0, a.1, g, x_a, h);
            }
            assignment_sum += h_assign;
            parameter_sum += h_param;
            draws += 1;
        }
    }
    Ok(EntropyScore {
        assignment: assignment_sum / draws as f64,
        parameter: parameter_sum / draws as f64,
    })
}

/// Draws `(l, k)` from the full proposal with a one-token bag `{g}`.
fn sample_with_word<R: Rng + ?Sized>(
    view: &CandidateView<'_>,
    g: usize,
    beta: f64,
    rng: &mut R,
) -> (usize, usize) {
    let table = view.table();
    let (big_l, big_k) = (table.concepts(), table.posdists());
    let mut log_values = Vec::with_capacity(big_l * big_k);
    for l in 0..big_l {
        let w = view.log_word_prob(l, g, beta);
        for k in 0..big_k {
            log_values.push(table.log_value(l, k) + w);
        }
    }
    let max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_values.iter().map(|v| (v - max).exp()).collect();
    let idx = crate::model::predictive::sample_index(&weights, rng);
    (idx / big_k, idx % big_k)
}
