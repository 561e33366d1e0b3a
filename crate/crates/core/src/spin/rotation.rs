use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ladder, DickeState};
use crate::error::{Error, Result};

const AXIS_TOL: f64 = 1e-12;

/// Rotation by `angle` (rad) about the unit vector `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    axis: [f64; 3],
    angle: f64,
}

impl RotationSpec {
    /// Any nonzero finite axis is accepted and normalised.
    pub fn new(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::invalid("rotation axis must be a nonzero finite vector"));
        }
        if !angle.is_finite() {
            return Err(Error::invalid("rotation angle must be finite"));
        }
        let axis = axis.map(|c| c / norm);
        debug_assert!((axis.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < AXIS_TOL);
        Ok(Self { axis, angle })
    }

    pub fn about_x(angle: f64) -> Self {
        Self { axis: [1.0, 0.0, 0.0], angle }
    }

    pub fn about_y(angle: f64) -> Self {
        Self { axis: [0.0, 1.0, 0.0], angle }
    }

    pub fn about_z(angle: f64) -> Self {
        Self { axis: [0.0, 0.0, 1.0], angle }
    }

    /// Rotation about the equatorial axis at `azimuth`.
    pub fn equatorial(azimuth: f64, angle: f64) -> Self {
        Self { axis: [azimuth.cos(), azimuth.sin(), 0.0], angle }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn inverse(&self) -> Self {
        Self { axis: self.axis, angle: -self.angle }
    }

    /// The SO(3) matrix acting on ⟨S⃗⟩ (Rodrigues' formula).
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let [x, y, z] = self.axis;
        let (s, c) = self.angle.sin_cos();
        let t = 1.0 - c;
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ]
    }
}

/// exp(−iφS_z): multiplies amplitude k by e^(−imφ).
pub fn rotate_z(state: &DickeState, angle: f64) -> DickeState {
    let mut out = state.clone();
    let s = state.spin();
    for (k, a) in out.amplitudes_mut().iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, -(k as f64 - s) * angle);
    }
    out
}

/// One-axis twisting exp(−iμS_z²).
pub fn twist(state: &DickeState, mu: f64) -> DickeState {
    let mut out = state.clone();
    let s = state.spin();
    for (k, a) in out.amplitudes_mut().iter_mut().enumerate() {
        let m = k as f64 - s;
        *a *= C64::from_polar(1.0, -mu * m * m);
    }
    out
}

/// Applies exp(−i·angle·(n̂·S⃗)).
///
/// In the Dicke basis n̂·S⃗ is tridiagonal for every axis, so the propagator
/// is applied directly through a Chebyshev expansion with Bessel-function
/// coefficients. The spectrum of n̂·S⃗ is exactly [−S, S], which fixes the
/// scaling; cost is O(N·(|angle|·S + O(S^⅓))).
pub fn rotate(state: &DickeState, rot: &RotationSpec) -> DickeState {
    let (mut axis, mut angle) = (rot.axis, rot.angle);
    if angle < 0.0 {
        axis = axis.map(|c| -c);
        angle = -angle;
    }
    if angle == 0.0 {
        return state.clone();
    }
    if axis[0].abs() < 1e-15 && axis[1].abs() < 1e-15 {
        return rotate_z(state, angle * axis[2]);
    }

    let n = state.atom_count();
    let s = state.spin();
    // Hs = (n̂·S)/S; store diag and the lower off-diagonal H[k+1][k]
    let diag: Vec<f64> = (0..=n).map(|k| axis[2] * (k as f64 - s) / s).collect();
    let lower_coef = C64::new(axis[0], -axis[1]) * (0.5 / s);
    let lower: Vec<C64> = (0..n).map(|k| lower_coef * ladder(n, k)).collect();

    let apply = |v: &[C64], out: &mut [C64]| {
        for k in 0..=n {
            let mut acc = v[k] * diag[k];
            if k > 0 {
                acc += lower[k - 1] * v[k - 1];
            }
            if k < n {
                acc += lower[k].conj() * v[k + 1];
            }
            out[k] = acc;
        }
    };

    let bessel = bessel_j_sequence(angle * s, 1e-17);
    let psi = state.amplitudes();
    let mut result: Vec<C64> = psi.iter().map(|a| a * bessel[0]).collect();
    if bessel.len() > 1 {
        let mut prev: Vec<C64> = psi.to_vec();
        let mut cur = vec![C64::new(0.0, 0.0); n + 1];
        apply(&prev, &mut cur);
        let mut next = vec![C64::new(0.0, 0.0); n + 1];
        // (−i)^k cycles with period 4
        let phases = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)];
        for (k, jk) in bessel.iter().enumerate().skip(1) {
            let coef = phases[k % 4] * (2.0 * jk);
            for (r, c) in result.iter_mut().zip(&cur) {
                *r += coef * c;
            }
            if k + 1 == bessel.len() {
                break;
            }
            apply(&cur, &mut next);
            for (nx, pv) in next.iter_mut().zip(&prev) {
                *nx = 2.0 * *nx - pv;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let mut out = DickeState::from_raw(n, result);
    out.renormalize();
    out
}

/// J_0(x) … J_K(x) for x ≥ 0 by Miller's backward recurrence normalised with
/// J₀ + 2ΣJ_2k = 1, truncated after the last order whose magnitude exceeds
/// `tol` beyond the turning point k ≈ x.
pub(crate) fn bessel_j_sequence(x: f64, tol: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return vec![1.0];
    }
    let start = (x + 60.0 + 25.0 * x.cbrt()).ceil() as usize;
    let start = start + start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-30;
    for k in (1..=start).rev() {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in j.iter_mut() {
        *v /= norm;
    }
    let turning = x.ceil() as usize;
    let mut last = turning.min(start);
    for k in (turning..=start).rev() {
        if j[k].abs() > tol {
            last = k;
            break;
        }
    }
    j.truncate(last + 2);
    j
}
