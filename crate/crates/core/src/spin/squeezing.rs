use serde::{Deserialize, Serialize};

use super::moments::norm3;
use super::SpinMoments;
use crate::error::{Error, Result};

/// Transverse noise analysis of a collective-spin state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingAnalysis {
    /// Wineland parameter N·min var(S_⊥)/|⟨S⃗⟩|².
    pub xi2: f64,
    pub min_variance: f64,
    pub max_variance: f64,
    /// Unit vector ⊥ ⟨S⃗⟩ along which the variance is minimal.
    pub min_direction: [f64; 3],
    /// Unit vector ⊥ ⟨S⃗⟩ along which the variance is maximal.
    pub max_direction: [f64; 3],
}

impl SqueezingAnalysis {
    pub fn xi2_db(&self) -> f64 {
        to_db(self.xi2)
    }
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Wineland squeezing parameter from the 2×2 covariance block transverse to
/// the mean spin, diagonalised in closed form.
pub fn squeezing_wineland(m: &SpinMoments) -> Result<SqueezingAnalysis> {
    let len = m.mean_length();
    if !(len > 1e-12 * m.spin().max(1.0)) {
        return Err(Error::DegenerateState("mean spin vanishes".into()));
    }
    let u = m.mean.map(|c| c / len);
    let (e1, e2) = transverse_frame(&u);
    let a = m.variance_along(&e1);
    let b = m.variance_along(&e2);
    let mut c = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            c += e1[i] * m.covariance[i][j] * e2[j];
        }
    }
    let half_sum = 0.5 * (a + b);
    let radius = (0.25 * (a - b) * (a - b) + c * c).sqrt();
    let (min_variance, max_variance) = (half_sum - radius, half_sum + radius);
    // eigenvector angle of the max eigenvalue within (e1, e2)
    let angle = 0.5 * (2.0 * c).atan2(a - b);
    let (s, co) = angle.sin_cos();
    let max_direction = [0, 1, 2].map(|i| co * e1[i] + s * e2[i]);
    let min_direction = [0, 1, 2].map(|i| -s * e1[i] + co * e2[i]);
    Ok(SqueezingAnalysis {
        xi2: m.atom_count as f64 * min_variance / (len * len),
        min_variance,
        max_variance,
        min_direction,
        max_direction,
    })
}

/// Right-handed orthonormal pair (e₁, e₂) ⊥ `u` with e₁ × e₂ = u, seeded
/// from the global x axis (y if `u` ∥ x).
pub(crate) fn transverse_frame(u: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let seed = if u[0].abs() > 0.9 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 0.0] };
    let dot = seed[0] * u[0] + seed[1] * u[1] + seed[2] * u[2];
    let mut e1 = [seed[0] - dot * u[0], seed[1] - dot * u[1], seed[2] - dot * u[2]];
    let n1 = norm3(&e1);
    e1.iter_mut().for_each(|c| *c /= n1);
    let e2 = cross(u, &e1);
    (e1, e2)
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
