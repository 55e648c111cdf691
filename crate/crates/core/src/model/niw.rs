use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{Hyperparameters, Mat2, Point, SufficientStats, DIM};
use crate::error::{Error, Result};

const JITTER: f64 = 1e-9;

/// Normal-inverse-Wishart posterior of one position distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiwPosterior {
    pub m: Point,
    pub kappa: f64,
    pub nu: f64,
    pub v: Mat2,
}

/// Conjugate update of the prior with the points assigned to `k`.
pub fn niw_posterior(
    k: usize,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> Result<NiwPosterior> {
    if k >= stats.posdists() {
        return Err(Error::OutOfRange {
            what: "posdist",
            index: k,
            limit: stats.posdists(),
        });
    }
    let n = f64::from(stats.n_posdist(k));
    let m0 = h.m0();
    let kappa = n + h.kappa0;
    let nu = h.nu0 + n;
    let m = (stats.sum_x(k) + m0 * h.kappa0) / kappa;
    let mut v =
        h.v0() + stats.sum_xxt(k) + m0 * m0.transpose() * h.kappa0 - m * m.transpose() * kappa;
    let off = 0.5 * (v[(0, 1)] + v[(1, 0)]);
    v[(0, 1)] = off;
    v[(1, 0)] = off;
    cholesky(&v)?;
    Ok(NiwPosterior { m, kappa, nu, v })
}

/// Lower Cholesky factor, retried once with a small diagonal jitter.
pub(crate) fn cholesky(a: &Mat2) -> Result<Mat2> {
    if let Some(c) = a.cholesky() {
        return Ok(c.l());
    }
    (a + Mat2::identity() * JITTER)
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Numerical(format!("matrix not positive-definite: {a:?}")))
}

/// Bivariate Student-t with a factorized scale matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentT {
    pub loc: Point,
    pub df: f64,
    /// Lower Cholesky factor of the scale matrix.
    pub chol: Mat2,
    log_norm: f64,
}

impl StudentT {
    pub fn new(loc: Point, scale: Mat2, df: f64) -> Result<Self> {
        if !(df > 0.0) {
            return Err(Error::Numerical(format!("degrees of freedom {df} <= 0")));
        }
        let chol = cholesky(&scale)?;
        let log_det = 2.0 * (chol[(0, 0)].ln() + chol[(1, 1)].ln());
        let d = DIM as f64;
        let log_norm = ln_gamma(0.5 * (df + d))
            - ln_gamma(0.5 * df)
            - 0.5 * d * (df * PI).ln()
            - 0.5 * log_det;
        Ok(Self {
            loc,
            df,
            chol,
            log_norm,
        })
    }

    /// Posterior predictive of a new point under a NIW posterior.
    pub fn predictive(post: &NiwPosterior) -> Result<Self> {
        let df = post.nu - DIM as f64 + 1.0;
        let scale = post.v * ((post.kappa + 1.0) / (post.kappa * df));
        Self::new(post.m, scale, df)
    }

    pub fn mahalanobis_sq(&self, x: &Point) -> f64 {
        let d = x - self.loc;
        let y0 = d.x / self.chol[(0, 0)];
        let y1 = (d.y - self.chol[(1, 0)] * y0) / self.chol[(1, 1)];
        y0 * y0 + y1 * y1
    }

    pub fn ln_pdf(&self, x: &Point) -> f64 {
        let d = DIM as f64;
        self.log_norm - 0.5 * (self.df + d) * (self.mahalanobis_sq(x) / self.df).ln_1p()
    }

    pub fn pdf(&self, x: &Point) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// Density of `x` under the posterior predictive of position distribution `k`.
pub fn position_predictive(
    x: &Point,
    k: usize,
    stats: &SufficientStats,
    h: &Hyperparameters,
) -> Result<f64> {
    let post = niw_posterior(k, stats, h)?;
    Ok(StudentT::predictive(&post)?.pdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, BagOfWords, Observation};
    use approx::assert_relative_eq;

    fn h() -> Hyperparameters {
        Hyperparameters {
            concepts: 2,
            posdists: 2,
            ..Hyperparameters::experiment_one()
        }
    }

    #[test]
    fn empty_component_returns_prior() {
        let h = h();
        let stats = SufficientStats::new(2, 2, 2);
        let post = niw_posterior(1, &stats, &h).unwrap();
        assert_eq!(post.m, h.m0());
        assert_eq!(post.kappa, h.kappa0);
        assert_eq!(post.nu, h.nu0);
        assert_relative_eq!(post.v, h.v0(), epsilon = 1e-15);
    }

    #[test]
    fn single_point_update_by_hand() {
        let h = h();
        let mut stats = SufficientStats::new(2, 2, 2);
        let obs = Observation::new(Point::new(1.0, 0.0), BagOfWords::single(0));
        stats.add(&obs, Assignment::new(0, 0)).unwrap();
        let post = niw_posterior(0, &stats, &h).unwrap();
        assert_relative_eq!(post.m.x, 1.0 / 1.001, epsilon = 1e-15);
        assert_relative_eq!(post.m.y, 0.0);
        assert_relative_eq!(post.kappa, 1.001);
        assert_relative_eq!(post.nu, h.nu0 + 1.0);
        // V = V0 + x x^T - kappa m m^T = V0 + (1 - 1/1.001) e1 e1^T
        let expected = h.v0() + Mat2::new(1.0 - 1.0 / 1.001, 0.0, 0.0, 0.0);
        assert_relative_eq!(post.v, expected, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_posdist() {
        let stats = SufficientStats::new(2, 2, 2);
        assert!(niw_posterior(2, &stats, &h()).is_err());
    }

    #[test]
    fn empty_predictive_is_independent_of_k() {
        let h = h();
        let stats = SufficientStats::new(2, 2, 2);
        let x = Point::new(0.7, -1.3);
        let a = position_predictive(&x, 0, &stats, &h).unwrap();
        let b = position_predictive(&x, 1, &stats, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prior_predictive_mode() {
        // At the mode the kernel is 1, leaving the normalizer.
        let h = h();
        let stats = SufficientStats::new(2, 2, 2);
        let df = h.nu0 - 1.0;
        let scale = h.v0() * ((h.kappa0 + 1.0) / (h.kappa0 * df));
        let expected = ln_gamma((df + 2.0) / 2.0)
            - ln_gamma(df / 2.0)
            - (df * PI).ln()
            - 0.5 * scale.determinant().ln();
        let got = position_predictive(&h.m0(), 0, &stats, &h).unwrap();
        assert_relative_eq!(got, expected.exp(), max_relative = 1e-12);
    }

    #[test]
    fn density_integrates_to_one_on_grid() {
        let h = Hyperparameters { kappa0: 1.0, ..h() };
        let mut stats = SufficientStats::new(2, 2, 2);
        for (x, y) in [(0.5, 0.1), (1.0, -0.3), (0.2, 0.9)] {
            let obs = Observation::new(Point::new(x, y), BagOfWords::single(0));
            stats.add(&obs, Assignment::new(0, 0)).unwrap();
        }
        let t = StudentT::predictive(&niw_posterior(0, &stats, &h).unwrap()).unwrap();
        let sd = t.chol[(0, 0)].max(t.chol[(1, 1)]);
        let half = 6.0 * sd;
        let n = 600;
        let step = 2.0 * half / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = Point::new(
                    t.loc.x - half + (i as f64 + 0.5) * step,
                    t.loc.y - half + (j as f64 + 0.5) * step,
                );
                total += t.pdf(&x) * step * step;
            }
        }
        assert!((total - 1.0).abs() < 1e-2, "integral {total}");
    }

    #[test]
    fn jitter_rescues_semidefinite_matrix() {
        let m = Mat2::new(1.0, 1.0, 1.0, 1.0);
        assert!(cholesky(&m).is_ok());
        assert!(cholesky(&Mat2::new(1.0, 2.0, 2.0, 1.0)).is_err());
    }
}
