use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::Dataset;

/// Fit of n = C sin(θ + φ) + offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyFit {
    pub contrast: f64,
    /// In (−π, π].
    pub phase: f64,
    pub offset: f64,
    /// Covariance of (C, φ, offset) from the residual variance.
    pub covariance: [[f64; 3]; 3],
    pub residual_rms: f64,
    pub points: usize,
}

impl RamseyFit {
    pub fn contrast_error(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn phase_error(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }
}

pub(crate) fn wrap_phase(x: f64) -> f64 {
    let w = x.sin().atan2(x.cos());
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Least-squares sine fit, linear in (C cos φ, C sin φ, offset). `weights`
/// defaults to uniform.
pub fn fit_ramsey(thetas: &[f64], n: &[f64], weights: Option<&[f64]>) -> Result<RamseyFit> {
    if thetas.len() != n.len() || weights.is_some_and(|w| w.len() != n.len()) {
        return Err(Error::invalid("thetas, n and weights must have equal lengths"));
    }
    let mut distinct: Vec<f64> = thetas.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 distinct θ values, got {}", distinct.len())));
    }
    let span = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    if span <= PI {
        return Err(Error::Fit("θ values must span more than π".into()));
    }
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for (i, (&t, &y)) in thetas.iter().zip(n).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let x = Vector3::new(t.sin(), t.cos(), 1.0);
        xtx += w * x * x.transpose();
        xty += w * y * x;
    }
    let eig = xtx.symmetric_eigen();
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(lo > 1e-12 * hi) {
        return Err(Error::Fit("design matrix is rank deficient".into()));
    }
    let inv = xtx.try_inverse().ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    let beta = inv * xty;
    let mut rss = 0.0;
    let mut wsum = 0.0;
    for (i, (&t, &y)) in thetas.iter().zip(n).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let r = y - (beta[0] * t.sin() + beta[1] * t.cos() + beta[2]);
        rss += w * r * r;
        wsum += w;
    }
    let m = n.len();
    let dof = m.saturating_sub(3);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let cov_lin = inv * sigma2;
    let (a, b) = (beta[0], beta[1]);
    let c = a.hypot(b);
    let j = if c > 0.0 {
        Matrix3::new(a / c, b / c, 0.0, -b / (c * c), a / (c * c), 0.0, 0.0, 0.0, 1.0)
    } else {
        Matrix3::identity()
    };
    let cov = j * cov_lin * j.transpose();
    let mut covariance = [[0.0; 3]; 3];
    for (r, row) in covariance.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = cov[(r, k)];
        }
    }
    Ok(RamseyFit {
        contrast: c,
        phase: wrap_phase(b.atan2(a)),
        offset: beta[2],
        covariance,
        residual_rms: (rss / wsum.max(f64::MIN_POSITIVE)).sqrt(),
        points: m,
    })
}

/// Fits the shot-resolved n values of several datasets, one θ each.
pub fn fit_ramsey_datasets(data: &[Dataset]) -> Result<RamseyFit> {
    let mut thetas = Vec::new();
    let mut n = Vec::new();
    for d in data {
        for r in &d.records {
            thetas.push(r.theta_rad);
            n.push(r.n);
        }
    }
    fit_ramsey(&thetas, &n, None)
}

/// φ − φ₀ wrapped to (−π, π], with its combined standard error.
pub fn phase_difference(with: &RamseyFit, reference: &RamseyFit) -> (f64, f64) {
    (
        wrap_phase(with.phase - reference.phase),
        (with.covariance[1][1] + reference.covariance[1][1]).sqrt(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_noiseless_fringe() {
        let thetas: Vec<f64> = (0..8).map(|i| i as f64 * PI / 4.0).collect();
        let n: Vec<f64> = thetas.iter().map(|t| 0.98 * (t + 0.3).sin()).collect();
        let f = fit_ramsey(&thetas, &n, None).unwrap();
        assert!((f.contrast - 0.98).abs() < 1e-10);
        assert!((f.phase - 0.3).abs() < 1e-10);
        assert!(f.offset.abs() < 1e-10);
    }

    #[test]
    fn degenerate_thetas_fail() {
        let thetas = [0.0, 0.0, 2.0 * PI, 0.1, 0.1];
        assert!(matches!(fit_ramsey(&thetas, &[0.0; 5], None), Err(Error::Fit(_))));
        let narrow = [0.0, 0.5, 1.0, 1.5, 2.0];
        assert!(fit_ramsey(&narrow, &[0.0; 5], None).is_err());
    }

    #[test]
    fn phase_difference_wraps() {
        let mk = |phase| RamseyFit {
            contrast: 1.0,
            phase,
            offset: 0.0,
            covariance: [[0.0; 3]; 3],
            residual_rms: 0.0,
            points: 8,
        };
        let (d, _) = phase_difference(&mk(-3.0), &mk(3.0));
        assert!((d - (2.0 * PI - 6.0)).abs() < 1e-12);
    }
}
