use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::Dataset;

/// Coherent-state noise at one mean atom number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// Mean detected atom number ⟨N⟩.
    pub mean_atoms: f64,
    /// Sample variance of n.
    pub var_n: f64,
    pub shots: usize,
}

impl CalibrationPoint {
    /// Uses the uncorrected n of each shot.
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        if d.len() < 2 {
            return Err(Error::invalid("a calibration point needs at least 2 shots"));
        }
        let n = d.raw_n_values();
        let k = n.len() as f64;
        let m = n.iter().sum::<f64>() / k;
        let var_n = n.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (k - 1.0);
        Ok(Self { mean_atoms: d.mean_detected_atoms(), var_n, shots: d.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub std_error: f64,
    /// 95 % confidence interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub chi2: f64,
    pub dof: usize,
    /// Detection intercept σ₁² + σ₂², atoms².
    pub detection_variance: f64,
}

impl AlphaFit {
    pub fn contains(&self, alpha: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&alpha)
    }
}

const Z95: f64 = 1.959_963_984_540_054;

/// Fits ⟨N⟩²var(n) = α⟨N⟩ + σ₁² + σ₂² with the intercept fixed by the known
/// detection noise. Weights follow the χ² variance of each sample variance
/// and are iterated to the fitted α.
pub fn calibrate_alpha(points: &[CalibrationPoint], det_sigma_n1: f64, det_sigma_n2: f64) -> Result<AlphaFit> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.mean_atoms).collect();
    if xs.iter().any(|x| !(*x > 0.0)) || points.iter().any(|p| p.shots < 2) {
        return Err(Error::invalid("points need positive atom numbers and at least 2 shots"));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 0.01 * b.abs());
    let spread = (xs.last().copied().unwrap_or(0.0) - xs.first().copied().unwrap_or(0.0)) / xs.last().copied().unwrap_or(1.0);
    if xs.len() < 3 || spread < 0.1 {
        return Err(Error::Conditioning(format!(
            "need at least 3 distinct ⟨N⟩ values spread over ≥ 10 %, got {} with spread {:.3}",
            xs.len(),
            spread
        )));
    }
    let det = det_sigma_n1 * det_sigma_n1 + det_sigma_n2 * det_sigma_n2;
    let ys: Vec<f64> = points.iter().map(|p| p.mean_atoms * p.mean_atoms * p.var_n - det).collect();
    let mut alpha = {
        let sxy: f64 = points.iter().zip(&ys).map(|(p, y)| p.mean_atoms * y).sum();
        let sxx: f64 = points.iter().map(|p| p.mean_atoms * p.mean_atoms).sum();
        sxy / sxx
    };
    let mut sxx_w = 0.0;
    let mut weights = vec![0.0; points.len()];
    for _ in 0..5 {
        let a = alpha.max(1e-3);
        for (w, p) in weights.iter_mut().zip(points) {
            let model = a * p.mean_atoms + det;
            *w = (p.shots - 1) as f64 / (2.0 * model * model);
        }
        sxx_w = points.iter().zip(&weights).map(|(p, w)| w * p.mean_atoms * p.mean_atoms).sum();
        let sxy_w: f64 = points.iter().zip(&weights).zip(&ys).map(|((p, w), y)| w * p.mean_atoms * y).sum();
        alpha = sxy_w / sxx_w;
    }
    let chi2 = points
        .iter()
        .zip(&weights)
        .zip(&ys)
        .map(|((p, w), y)| w * (y - alpha * p.mean_atoms).powi(2))
        .sum();
    let std_error = 1.0 / sxx_w.sqrt();
    Ok(AlphaFit {
        alpha,
        std_error,
        ci_low: alpha - Z95 * std_error,
        ci_high: alpha + Z95 * std_error,
        chi2,
        dof: points.len() - 1,
        detection_variance: det,
    })
}
