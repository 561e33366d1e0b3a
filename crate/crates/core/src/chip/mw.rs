use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::{norm, unit_field, ChipGeometry, WireRole};
use super::biot_savart;
use crate::constants::{ACZ_PI_HZ_PER_G2, ACZ_SIGMA_MINUS_HZ_PER_G2, ACZ_SIGMA_PLUS_HZ_PER_G2, GAUSS};
use crate::error::{Error, Result};
use crate::spin::transverse_frame;

/// Microwave magnetic phasor (peak amplitude) at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwFieldSample {
    pub position_m: [f64; 3],
    pub amplitude_t: [C64; 3],
}

/// Magnitudes of the (π, σ⁺, σ⁻) parts of a phasor, T.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwComponents {
    pub pi_t: f64,
    pub sigma_plus_t: f64,
    pub sigma_minus_t: f64,
}

impl MwComponents {
    /// Differential ac-Zeeman shift V_mw/h, Hz.
    pub fn potential_hz(&self) -> f64 {
        let g2 = |b: f64| (b / GAUSS) * (b / GAUSS);
        ACZ_PI_HZ_PER_G2 * g2(self.pi_t)
            + ACZ_SIGMA_PLUS_HZ_PER_G2 * g2(self.sigma_plus_t)
            + ACZ_SIGMA_MINUS_HZ_PER_G2 * g2(self.sigma_minus_t)
    }
}

/// Phasor sum over the mw-role segments.
pub fn mw_field(geom: &ChipGeometry, p: &[f64; 3]) -> Result<MwFieldSample> {
    let mut amp = [C64::new(0.0, 0.0); 3];
    for seg in geom.segments.iter().filter(|s| s.role == WireRole::Mw) {
        if seg.current_a == 0.0 {
            continue;
        }
        let phasor = C64::from_polar(seg.current_a, seg.phase_rad);
        let u = unit_field(&seg.start_m, &seg.end_m, p)?;
        for k in 0..3 {
            amp[k] += phasor * u[k];
        }
    }
    Ok(MwFieldSample { position_m: *p, amplitude_t: amp })
}

/// Decomposes a phasor relative to the static quantisation axis.
pub fn mw_components(sample: &MwFieldSample, static_direction: &[f64; 3]) -> Result<MwComponents> {
    let len = norm(static_direction);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Domain("static field vanishes; no quantisation axis".into()));
    }
    let u = static_direction.map(|c| c / len);
    let (e1, e2) = transverse_frame(&u);
    let b = &sample.amplitude_t;
    let proj = |v: &[f64; 3]| b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
    let (b1, b2) = (proj(&e1), proj(&e2));
    let i = C64::i();
    Ok(MwComponents {
        pi_t: proj(&u).norm(),
        sigma_plus_t: ((b1 - i * b2) / std::f64::consts::SQRT_2).norm(),
        sigma_minus_t: ((b1 + i * b2) / std::f64::consts::SQRT_2).norm(),
    })
}

/// V_mw/h at `p`, Hz, with the static field of `geom` as quantisation axis.
pub fn v_mw(geom: &ChipGeometry, p: &[f64; 3]) -> Result<f64> {
    if !geom.segments.iter().any(|s| s.role == WireRole::Mw && s.current_a != 0.0) {
        return Ok(0.0);
    }
    let axis = biot_savart(geom, p)?;
    Ok(mw_components(&mw_field(geom, p)?, &axis)?.potential_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sample(a: [C64; 3]) -> MwFieldSample {
        MwFieldSample { position_m: [0.0; 3], amplitude_t: a }
    }

    #[test]
    fn linear_along_axis_is_pure_pi() {
        let c = mw_components(&sample([C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2e-5, 0.0)]), &[0.0, 0.0, 3.0]).unwrap();
        assert!((c.pi_t - 2e-5).abs() < 1e-20 && c.sigma_plus_t < 1e-20 && c.sigma_minus_t < 1e-20);
    }

    #[test]
    fn circular_phasors_are_pure_sigma() {
        let u = [0.0, 0.0, 1.0];
        let (e1, e2) = transverse_frame(&u);
        let plus: [C64; 3] = [0, 1, 2].map(|k| C64::new(e1[k], e2[k]) * FRAC_1_SQRT_2);
        let c = mw_components(&sample(plus), &u).unwrap();
        assert!((c.sigma_plus_t - 1.0).abs() < 1e-15 && c.sigma_minus_t < 1e-15 && c.pi_t < 1e-15);
        let minus: [C64; 3] = [0, 1, 2].map(|k| C64::new(e1[k], -e2[k]) * FRAC_1_SQRT_2);
        let c = mw_components(&sample(minus), &u).unwrap();
        assert!((c.sigma_minus_t - 1.0).abs() < 1e-15 && c.sigma_plus_t < 1e-15);
    }

    #[test]
    fn norm_partition() {
        let s = FRAC_1_SQRT_2;
        let a = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)].map(|v| v * 1e-5);
        let c = mw_components(&sample(a), &[0.0, 0.0, 1.0]).unwrap();
        let total = c.pi_t.powi(2) + c.sigma_plus_t.powi(2) + c.sigma_minus_t.powi(2);
        assert!((total - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn potential_arithmetic() {
        let c = MwComponents { pi_t: 0.1 * GAUSS, sigma_plus_t: 0.0, sigma_minus_t: 0.0 };
        assert!((c.potential_hz() - 710.0).abs() < 1e-9);
        assert!(mw_components(&sample([C64::new(1.0, 0.0); 3]), &[0.0; 3]).is_err());
    }
}
