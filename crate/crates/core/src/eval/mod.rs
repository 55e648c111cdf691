//! Clustering accuracy, exploration efficiency and word-ranking metrics.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Mat2, ModelParams, Point};
use crate::rbpf::{Particle, ParticleSet};

/// Which latent label a metric looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Concept,
    Posdist,
}

impl LabelKind {
    pub fn of(self, a: &Assignment) -> usize {
        match self {
            LabelKind::Concept => a.concept,
            LabelKind::Posdist => a.posdist,
        }
    }
}

fn pairs(n: u64) -> i128 {
    i128::from(n) * (i128::from(n) - 1) / 2
}

/// Adjusted Rand index from the contingency table. Degenerate cases where
/// the expected and maximal index coincide (including fewer than two items)
/// score 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: i128 = cells.values().map(|&c| pairs(c)).sum();
    let sa: i128 = rows.values().map(|&c| pairs(c)).sum();
    let sb: i128 = cols.values().map(|&c| pairs(c)).sum();
    let n = pairs(a.len() as u64);
    let num = 2 * n * index - 2 * sa * sb;
    let den = n * (sa + sb) - 2 * sa * sb;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

fn weighted(labels: &[(f64, Vec<usize>)], truth: &[usize]) -> Result<f64> {
    labels
        .iter()
        .map(|(w, l)| Ok(w * adjusted_rand_index(l, truth)?))
        .sum()
}

fn particle_labels(p: &Particle, kind: LabelKind) -> Vec<usize> {
    p.assignments().iter().map(|a| kind.of(a)).collect()
}

/// Particle-weighted ARI of the labels of every observation so far.
pub fn weighted_ari(set: &ParticleSet, truth: &[usize], kind: LabelKind) -> Result<f64> {
    let labels: Vec<(f64, Vec<usize>)> = set
        .particles()
        .iter()
        .map(|p| (p.weight(), particle_labels(p, kind)))
        .collect();
    if let Some((_, l)) = labels.first() {
        if l.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: l.len(),
                right: truth.len(),
            });
        }
    }
    weighted(&labels, truth)
}

/// Point-estimate parameters prepared for repeated decoding.
struct Decoder {
    /// `(mu_k, Sigma_k^-1, log normalizer)` per position distribution.
    gaussians: Vec<(Point, Mat2, f64)>,
    /// `ln pi_l + ln phi_lk`, row-major.
    log_weights: Vec<f64>,
    posdists: usize,
}

impl Decoder {
    fn new(params: &ModelParams) -> Result<Self> {
        let gaussians = params
            .mu
            .iter()
            .zip(&params.sigma)
            .map(|(m, s)| {
                let inv = s
                    .try_inverse()
                    .ok_or_else(|| Error::Numerical("singular covariance".into()))?;
                let norm = -(2.0 * std::f64::consts::PI).ln() - 0.5 * s.determinant().ln();
                Ok((*m, inv, norm))
            })
            .collect::<Result<Vec<_>>>()?;
        let log_weights = params
            .pi
            .iter()
            .zip(&params.phi)
            .flat_map(|(pi, phi)| phi.iter().map(move |f| pi.ln() + f.ln()))
            .collect();
        Ok(Self {
            gaussians,
            log_weights,
            posdists: params.mu.len(),
        })
    }

    fn decode(&self, x: &Point) -> Assignment {
        let dens: Vec<f64> = self
            .gaussians
            .iter()
            .map(|(m, inv, norm)| {
                let d = x - m;
                norm - 0.5 * (d.transpose() * inv * d)[0]
            })
            .collect();
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, w) in self.log_weights.iter().enumerate() {
            let v = w + dens[i % self.posdists];
            if v > best.0 {
                best = (v, i);
            }
        }
        Assignment::new(best.1 / self.posdists, best.1 % self.posdists)
    }
}

/// Most probable `(l, k)` for a position under point-estimate parameters:
/// argmax of `pi_l * phi_lk * N(x | mu_k, Sigma_k)`, lowest index on ties.
pub fn decode_position(params: &ModelParams, x: &Point) -> Result<Assignment> {
    Ok(Decoder::new(params)?.decode(x))
}

/// Weighted ARI after labelling unobserved candidates by each particle's
/// most probable assignment. `visits` lists the candidate id of every
/// observation; `truth` holds one label per candidate.
pub fn predictive_padding(
    set: &ParticleSet,
    candidates: &[Point],
    visits: &[usize],
    truth: &[usize],
    kind: LabelKind,
) -> Result<f64> {
    if candidates.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: truth.len(),
        });
    }
    if let Some(&bad) = visits.iter().find(|&&c| c >= candidates.len()) {
        return Err(Error::OutOfRange {
            what: "candidate",
            index: bad,
            limit: candidates.len(),
        });
    }
    let mut seen = vec![false; candidates.len()];
    for &c in visits {
        seen[c] = true;
    }
    let unobserved: Vec<usize> = (0..candidates.len()).filter(|&c| !seen[c]).collect();
    let full_truth: Vec<usize> = visits
        .iter()
        .chain(&unobserved)
        .map(|&c| truth[c])
        .collect();
    let labels = set
        .particles()
        .par_iter()
        .map(|p| {
            let mut l = particle_labels(p, kind);
            if l.len() != visits.len() {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: visits.len(),
                });
            }
            let decoder = Decoder::new(p.params())?;
            for &c in &unobserved {
                l.push(kind.of(&decoder.decode(&candidates[c])));
            }
            Ok((p.weight(), l))
        })
        .collect::<Result<Vec<_>>>()?;
    weighted(&labels, &full_truth)
}

/// First step reaching `threshold`, as a percentage of the series length;
/// 100 when never reached.
pub fn nms(series: &[f64], threshold: f64) -> f64 {
    match series.iter().position(|&v| v >= threshold) {
        Some(i) => (i + 1) as f64 / series.len() as f64 * 100.0,
        None => 100.0,
    }
}

/// Fraction of steps at or above `threshold`.
pub fn lsr(series: &[f64], threshold: f64) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    series.iter().filter(|&&v| v >= threshold).count() as f64 / series.len() as f64
}

pub const SUCCESS_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelSummary {
    pub cumulative: Vec<f64>,
    pub total: f64,
    /// Total cells divided by the number of candidate points.
    pub per_candidate: f64,
}

pub fn travel_distance(path_lengths: &[f64], candidate_count: usize) -> TravelSummary {
    let cumulative: Vec<f64> = path_lengths
        .iter()
        .scan(0.0, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    let total = cumulative.last().copied().unwrap_or(0.0);
    TravelSummary {
        cumulative,
        total,
        per_candidate: if candidate_count == 0 {
            0.0
        } else {
            total / candidate_count as f64
        },
    }
}

/// Words ranked by pointwise mutual information with position
/// distribution `k`, highest first, ties by word index.
pub fn pmi_top_words(params: &ModelParams, k: usize, top_n: usize) -> Result<Vec<(usize, f64)>> {
    let big_k = params.mu.len();
    if k >= big_k {
        return Err(Error::OutOfRange {
            what: "posdist",
            index: k,
            limit: big_k,
        });
    }
    let big_g = params.w.first().map_or(0, Vec::len);
    let joint_k: f64 = params
        .pi
        .iter()
        .zip(&params.phi)
        .map(|(p, f)| p * f[k])
        .sum();
    let mut ranked: Vec<(usize, f64)> = (0..big_g)
        .map(|g| {
            let mut given_k = 0.0;
            let mut marginal = 0.0;
            for ((w, pi), phi) in params.w.iter().zip(&params.pi).zip(&params.phi) {
                given_k += w[g] * pi * phi[k];
                marginal += w[g] * pi;
            }
            (g, (given_k / joint_k).ln() - marginal.ln())
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ari_basics() {
        assert_eq!(
            adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(),
            1.0
        );
        assert_eq!(
            adjusted_rand_index(&[0, 0, 1, 2], &[5, 5, 9, 7]).unwrap(),
            1.0
        );
        assert_eq!(
            adjusted_rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(),
            -0.5
        );
        assert!(adjusted_rand_index(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn nms_and_lsr() {
        let mut s = vec![0.0; 50];
        s[4] = 0.7;
        assert_eq!(nms(&s, 0.6), 10.0);
        let mut s = vec![0.0; 100];
        s[0] = 0.6;
        assert_eq!(nms(&s, 0.6), 1.0);
        assert_eq!(nms(&[0.1, 0.2], 0.6), 100.0);
        assert_eq!(lsr(&[0.9; 4], 0.6), 1.0);
        assert_eq!(
            lsr(&[0.7, 0.7, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.6),
            0.3
        );
        assert_eq!(lsr(&[0.1], 0.6), 0.0);
    }

    #[test]
    fn travel() {
        let t = travel_distance(&[], 10);
        assert_eq!(t.total, 0.0);
        let t = travel_distance(&[3.0, 4.0], 2);
        assert_eq!(t.cumulative, [3.0, 7.0]);
        assert_eq!(t.per_candidate, 3.5);
    }

    fn params(pi: Vec<f64>, phi: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> ModelParams {
        let k = phi[0].len();
        ModelParams {
            pi,
            phi,
            w,
            mu: vec![Point::zeros(); k],
            sigma: vec![Mat2::identity(); k],
        }
    }

    #[test]
    fn pmi_degenerate_cases() {
        let one_word = params(
            vec![0.5, 0.5],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            vec![vec![1.0], vec![1.0]],
        );
        assert_relative_eq!(
            pmi_top_words(&one_word, 0, 5).unwrap()[0].1,
            0.0,
            epsilon = 1e-12
        );
        let one_concept = params(vec![1.0], vec![vec![0.3, 0.7]], vec![vec![0.2, 0.8]]);
        for (_, v) in pmi_top_words(&one_concept, 1, 5).unwrap() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pmi_two_by_two() {
        // p(s|k=0) = (0.6*0.8*0.9 + 0.4*0.3*0.2) / (0.6*0.8 + 0.4*0.3)
        // p(s)     = 0.6*0.9 + 0.4*0.2
        let p = params(
            vec![0.6, 0.4],
            vec![vec![0.8, 0.2], vec![0.3, 0.7]],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        );
        let got = pmi_top_words(&p, 0, 2).unwrap();
        let s0 = ((0.432 + 0.024) / 0.6 / 0.62_f64).ln();
        let s1 = ((0.048 + 0.096) / 0.6 / 0.38_f64).ln();
        assert_eq!(got[0].0, 0);
        assert_relative_eq!(got[0].1, s0, epsilon = 1e-12);
        assert_relative_eq!(got[1].1, s1, epsilon = 1e-12);
    }
}
