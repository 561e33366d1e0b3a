use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on Σ|a|² − 1 accepted when building a state from raw amplitudes.
pub(crate) const NORM_TOL: f64 = 1e-10;

/// Pure state of N two-level atoms in the symmetric subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeState {
    atom_count: usize,
    amplitudes: Vec<C64>,
}

impl DickeState {
    /// Build a state from amplitudes indexed by `k = m + N/2`.
    ///
    /// The amplitudes must already be normalised to within 10⁻¹⁰.
    pub fn from_amplitudes(atom_count: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::invalid("atom count must be at least 1"));
        }
        if amplitudes.len() != atom_count + 1 {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for N = {atom_count}, got {}",
                atom_count + 1,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { atom_count, amplitudes })
    }

    pub(crate) fn from_raw(atom_count: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), atom_count + 1);
        Self { atom_count, amplitudes }
    }

    /// Every atom in |2⟩ (m = +N/2).
    pub fn all_up(atom_count: usize) -> Result<Self> {
        Self::basis(atom_count, atom_count)
    }

    /// Every atom in |1⟩ (m = −N/2).
    pub fn all_down(atom_count: usize) -> Result<Self> {
        Self::basis(atom_count, 0)
    }

    /// The Dicke basis state with `n_up` atoms in |2⟩.
    pub fn basis(atom_count: usize, n_up: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::invalid("atom count must be at least 1"));
        }
        if n_up > atom_count {
            return Err(Error::invalid(format!("{n_up} atoms in |2> exceeds N = {atom_count}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); atom_count + 1];
        amplitudes[n_up] = C64::new(1.0, 0.0);
        Ok(Self { atom_count, amplitudes })
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    /// Total spin S = N/2.
    pub fn spin(&self) -> f64 {
        self.atom_count as f64 / 2.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    /// Spin projection m of basis index `k`.
    #[inline]
    pub fn projection(&self, k: usize) -> f64 {
        k as f64 - self.spin()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest per-amplitude distance to `other`.
    pub fn max_abs_diff(&self, other: &DickeState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &DickeState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
    }
}

/// Spin-coherent state pointing along (`polar`, `azimuth`).
///
/// Amplitudes are √C(N,k) cos^k(θ/2) sin^(N−k)(θ/2) e^(−imφ), evaluated in log
/// space so that N in the thousands does not underflow.
pub fn coherent_state(atom_count: usize, polar: f64, azimuth: f64) -> Result<DickeState> {
    if atom_count == 0 {
        return Err(Error::invalid("atom count must be at least 1"));
    }
    if !polar.is_finite() || !azimuth.is_finite() {
        return Err(Error::invalid("coherent-state angles must be finite"));
    }
    let n = atom_count;
    let s = n as f64 / 2.0;
    let (ln_cos, ln_sin) = ((polar / 2.0).cos().abs().ln(), (polar / 2.0).sin().abs().ln());
    // signs of cos and sin matter for polar outside [0, π]
    let sign_cos = (polar / 2.0).cos().signum();
    let sign_sin = (polar / 2.0).sin().signum();

    let mut ln_fact = vec![0.0; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let pow_term = |count: usize, ln_v: f64| if count == 0 { 0.0 } else { count as f64 * ln_v };

    let amplitudes = (0..=n)
        .map(|k| {
            let ln_binom = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
            let ln_mag = 0.5 * ln_binom + pow_term(k, ln_cos) + pow_term(n - k, ln_sin);
            let sign = if k % 2 == 1 && sign_cos < 0.0 { -1.0 } else { 1.0 }
                * if (n - k) % 2 == 1 && sign_sin < 0.0 { -1.0 } else { 1.0 };
            let m = k as f64 - s;
            C64::from_polar(sign * ln_mag.exp(), -m * azimuth)
        })
        .collect();
    let mut state = DickeState::from_raw(n, amplitudes);
    state.renormalize();
    Ok(state)
}

/// Outcome probabilities |a_k|² for N₂ = k atoms in |2⟩ (m = k − N/2).
pub fn measure_distribution(state: &DickeState) -> Vec<f64> {
    let probs: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    probs.into_iter().map(|p| p / total).collect()
}
