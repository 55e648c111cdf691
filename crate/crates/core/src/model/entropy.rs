//! Closed-form differential entropies of the conjugate posteriors.

use std::f64::consts::PI;

use statrs::function::gamma::{digamma, ln_gamma};

use super::{niw_posterior, Hyperparameters, Mat2, SufficientStats, DIM};
use crate::error::Result;

fn ln_multigamma(a: f64, d: usize) -> f64 {
    let df = d as f64;
    df * (df - 1.0) / 4.0 * PI.ln()
        + (1..=d)
            .map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0))
            .sum::<f64>()
}

fn multi_digamma(a: f64, d: usize) -> f64 {
    (1..=d).map(|j| digamma(a + (1.0 - j as f64) / 2.0)).sum()
}

/// Entropy of `Dir(concentration)`.
pub fn dirichlet_entropy(concentration: &[f64]) -> f64 {
    let n = concentration.len() as f64;
    let a0: f64 = concentration.iter().sum();
    let ln_beta: f64 = concentration.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(a0);
    ln_beta + (a0 - n) * digamma(a0)
        - concentration
            .iter()
            .map(|&a| (a - 1.0) * digamma(a))
            .sum::<f64>()
}

/// Entropy of the inverse-Wishart `IW(scale, nu)` over 2x2 covariances.
pub fn inverse_wishart_entropy(scale: &Mat2, nu: f64) -> f64 {
    let d = DIM as f64;
    let ln_det = scale.determinant().ln();
    0.5 * (d + 1.0) * ln_det - 0.5 * d * (d + 1.0) * 2f64.ln() + ln_multigamma(0.5 * nu, DIM)
        - 0.5 * (nu + d + 1.0) * multi_digamma(0.5 * nu, DIM)
        + 0.5 * nu * d
}

/// Joint entropy of `(mu, Sigma) ~ NIW(m, kappa, nu, scale)`.
pub fn niw_entropy(kappa: f64, nu: f64, scale: &Mat2) -> f64 {
    let d = DIM as f64;
    let expected_ln_det_sigma =
        scale.determinant().ln() - multi_digamma(0.5 * nu, DIM) - d * 2f64.ln();
    inverse_wishart_entropy(scale, nu) + 0.5 * d * (1.0 + (2.0 * PI).ln()) - 0.5 * d * kappa.ln()
        + 0.5 * expected_ln_det_sigma
}

/// Entropy of the full parameter posterior of one particle: the factors are
/// independent given the assignments, so the entropies add.
pub fn parameter_entropy(stats: &SufficientStats, h: &Hyperparameters) -> Result<f64> {
    let (big_l, big_k, big_g) = (stats.concepts(), stats.posdists(), stats.vocab_size());
    let pi: Vec<f64> = (0..big_l)
        .map(|l| f64::from(stats.n_concept(l)) + h.alpha / big_l as f64)
        .collect();
    let mut total = dirichlet_entropy(&pi);
    for l in 0..big_l {
        let phi: Vec<f64> = (0..big_k)
            .map(|k| f64::from(stats.n_concept_posdist(l, k)) + h.gamma / big_k as f64)
            .collect();
        total += dirichlet_entropy(&phi);
        if big_g > 1 {
            let w: Vec<f64> = stats
                .word_row(l)
                .iter()
                .map(|&c| f64::from(c) + h.beta)
                .collect();
            total += dirichlet_entropy(&w);
        }
    }
    for k in 0..big_k {
        let post = niw_posterior(k, stats, h)?;
        total += niw_entropy(post.kappa, post.nu, &post.v);
    }
    Ok(total)
}
