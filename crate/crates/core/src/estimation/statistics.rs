use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::to_db;

/// Standard quantum limit 1/√N, radians.
pub fn sql_phase(atoms: f64) -> f64 {
    1.0 / atoms.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoise {
    pub sigma_phi_rad: f64,
    /// Jackknife standard error of `sigma_phi_rad`.
    pub std_error_rad: f64,
    pub mean_n: f64,
    pub shots: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingEstimate {
    pub xi2: f64,
    pub xi2_db: f64,
    /// Jackknife standard error of `xi2_db`.
    pub std_error_db: f64,
    /// Set by [`squeezing_detection_subtracted`] only.
    pub detection_subtracted: bool,
}

fn mean_and_ss(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum())
}

/// Leave-one-out sample variances.
fn jackknife_variances(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let (m, ss) = mean_and_ss(x);
    x.iter().map(|v| (ss - (v - m) * (v - m) * n / (n - 1.0)).max(0.0) / (n - 2.0)).collect()
}

fn jackknife_error(estimates: &[f64]) -> f64 {
    let n = estimates.len() as f64;
    let (_, ss) = mean_and_ss(estimates);
    ((n - 1.0) / n * ss).sqrt()
}

fn check_mid_fringe(n: &[f64], contrast: f64) -> Result<f64> {
    if !(contrast > 0.0) {
        return Err(Error::invalid("contrast must be positive"));
    }
    if n.len() < 30 {
        return Err(Error::invalid(format!("need at least 30 shots, got {}", n.len())));
    }
    let (m, _) = mean_and_ss(n);
    if m.abs() >= 0.2 * contrast {
        return Err(Error::invalid(format!("⟨n⟩ = {m:.3} is not near mid-fringe")));
    }
    Ok(m)
}

/// σφ = std(n)/C at mid-fringe.
pub fn phase_noise(n: &[f64], contrast: f64) -> Result<PhaseNoise> {
    let mean_n = check_mid_fringe(n, contrast)?;
    let (_, ss) = mean_and_ss(n);
    let sigma = (ss / (n.len() - 1) as f64).sqrt() / contrast;
    let loo: Vec<f64> = jackknife_variances(n).into_iter().map(|v| v.sqrt() / contrast).collect();
    Ok(PhaseNoise { sigma_phi_rad: sigma, std_error_rad: jackknife_error(&loo), mean_n, shots: n.len() })
}

/// ξ² = N·var(n)/C², detection noise included.
pub fn squeezing_from_data(n: &[f64], atoms: f64, contrast: f64) -> Result<SqueezingEstimate> {
    squeezing_impl(n, atoms, contrast, 0.0, false)
}

/// ξ² = N·(var(n) − σ_det²)/C², for noise-budget tables.
pub fn squeezing_detection_subtracted(
    n: &[f64],
    atoms: f64,
    contrast: f64,
    detection_sigma_n: f64,
) -> Result<SqueezingEstimate> {
    squeezing_impl(n, atoms, contrast, detection_sigma_n * detection_sigma_n, true)
}

fn squeezing_impl(n: &[f64], atoms: f64, contrast: f64, subtract: f64, flag: bool) -> Result<SqueezingEstimate> {
    check_mid_fringe(n, contrast)?;
    if !(atoms > 0.0) {
        return Err(Error::invalid("atom number must be positive"));
    }
    let scale = atoms / (contrast * contrast);
    let (_, ss) = mean_and_ss(n);
    let xi2 = scale * (ss / (n.len() - 1) as f64 - subtract);
    if !(xi2 > 0.0) {
        return Err(Error::DegenerateState("subtracted variance is not positive".into()));
    }
    let loo: Vec<f64> = jackknife_variances(n)
        .into_iter()
        .map(|v| to_db((scale * (v - subtract)).max(f64::MIN_POSITIVE)))
        .collect();
    Ok(SqueezingEstimate { xi2, xi2_db: to_db(xi2), std_error_db: jackknife_error(&loo), detection_subtracted: flag })
}

/// σφ² = a + b·T² fitted to phase variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrowthFit {
    /// Constant term, rad².
    pub a: f64,
    /// Growth coefficient, rad²/s².
    pub b: f64,
}

impl NoiseGrowthFit {
    pub fn variance_at(&self, t: f64) -> f64 {
        self.a + self.b * t * t
    }

    /// Time at which the model variance reaches `level`; `None` if it never
    /// does or starts above it.
    pub fn crossing_time(&self, level: f64) -> Option<f64> {
        if self.a >= level || self.b <= 0.0 {
            return None;
        }
        Some(((level - self.a) / self.b).sqrt())
    }
}

/// Weighted least squares of σφ² against T². Each variance is weighted by
/// (shots − 1)/(2 model²), iterated from uniform weights.
pub fn fit_noise_growth(times: &[f64], variances: &[f64], shots: &[usize]) -> Result<NoiseGrowthFit> {
    if times.len() != variances.len() || times.len() != shots.len() {
        return Err(Error::invalid("times, variances and shots must have equal lengths"));
    }
    if times.len() < 2 {
        return Err(Error::Fit("need at least 2 points".into()));
    }
    let mut fit = NoiseGrowthFit { a: 0.0, b: 0.0 };
    let mut weights = vec![1.0; times.len()];
    for _ in 0..4 {
        let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&t, &v), &w) in times.iter().zip(variances).zip(&weights) {
            let x = t * t;
            sw += w;
            sx += w * x;
            sy += w * v;
            sxx += w * x * x;
            sxy += w * x * v;
        }
        let det = sw * sxx - sx * sx;
        if !(det.abs() > 1e-14 * sw * sxx) {
            return Err(Error::Fit("T values are degenerate".into()));
        }
        fit = NoiseGrowthFit { a: (sxx * sy - sx * sxy) / det, b: (sw * sxy - sx * sy) / det };
        for ((w, &t), &s) in weights.iter_mut().zip(times).zip(shots) {
            let model = fit.variance_at(t).max(1e-3 * variances.iter().cloned().fold(0.0, f64::max));
            *w = (s.max(2) - 1) as f64 / (2.0 * model * model);
        }
    }
    Ok(fit)
}
