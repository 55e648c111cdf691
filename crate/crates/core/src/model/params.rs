use serde::{Deserialize, Serialize};

use super::{niw_posterior, Hyperparameters, Mat2, Point, SufficientStats, DIM};
use crate::error::{Error, Result};

/// Posterior-mean point estimate of the model parameters of one particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Concept weights.
    pub pi: Vec<f64>,
    /// Position-distribution weights per concept.
    pub phi: Vec<Vec<f64>>,
    /// Word probabilities per concept.
    pub w: Vec<Vec<f64>>,
    pub mu: Vec<Point>,
    pub sigma: Vec<Mat2>,
}

/// Expectation of every conjugate posterior: Dirichlet means for the
/// categorical parameters, the NIW mean for each Gaussian.
pub fn expected_params(stats: &SufficientStats, h: &Hyperparameters) -> Result<ModelParams> {
    let (big_l, big_k, big_g) = (stats.concepts(), stats.posdists(), stats.vocab_size());
    let t = f64::from(stats.total());
    let pi = (0..big_l)
        .map(|l| (f64::from(stats.n_concept(l)) + h.alpha / big_l as f64) / (t + h.alpha))
        .collect();
    let phi = (0..big_l)
        .map(|l| {
            let t_l = f64::from(stats.n_concept(l));
            (0..big_k)
                .map(|k| {
                    (f64::from(stats.n_concept_posdist(l, k)) + h.gamma / big_k as f64)
                        / (t_l + h.gamma)
                })
                .collect()
        })
        .collect();
    let w = (0..big_l)
        .map(|l| {
            let denom = f64::from(stats.n_word_total(l)) + big_g as f64 * h.beta;
            stats
                .word_row(l)
                .iter()
                .map(|&c| (f64::from(c) + h.beta) / denom)
                .collect()
        })
        .collect();
    let mut mu = Vec::with_capacity(big_k);
    let mut sigma = Vec::with_capacity(big_k);
    for k in 0..big_k {
        let post = niw_posterior(k, stats, h)?;
        let dof = post.nu - DIM as f64 - 1.0;
        if dof <= 0.0 {
            return Err(Error::Numerical(format!(
                "inverse-Wishart mean undefined for nu = {}",
                post.nu
            )));
        }
        mu.push(post.m);
        sigma.push(post.v / dof);
    }
    Ok(ModelParams {
        pi,
        phi,
        w,
        mu,
        sigma,
    })
}
