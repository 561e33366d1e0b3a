use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the final atom-number split is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    /// Exact for N ≤ 256 without contrast decay, Gaussian otherwise.
    #[default]
    Auto,
    /// Sample from the full Dicke-state distribution.
    Exact,
    /// Normal distribution with the exact mean and variance of S_z,
    /// rounded and clamped to [0, N].
    Gaussian,
}

/// Largest atom number sampled exactly in [`ReadoutMode::Auto`].
pub const AUTO_EXACT_LIMIT: usize = 256;

/// Noise parameters; field names carry units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub mean_atoms: f64,
    /// Shot-to-shot preparation noise of the total atom number.
    pub prep_sigma_atoms: f64,
    pub det_sigma_n1_atoms: f64,
    pub det_sigma_n2_atoms: f64,
    /// Detection noise in n at η = 0.5; the atom-count sigmas are scaled
    /// linearly in η to reach it. `None` keeps them fixed.
    pub det_sigma_n_far: Option<f64>,
    /// rms of the quasi-static oscillator detuning.
    pub tech_sigma_hz: f64,
    pub meanfield_coeff_hz_per_atom: f64,
    pub correction_enabled: bool,
    /// Reference atom number of the correction; defaults to `mean_atoms`.
    pub correction_ref_atoms: Option<f64>,
    /// Detected counts are `imaging_gain` times the true counts.
    pub imaging_gain: f64,
    /// Per-atom coherence retained at readout (1 = no contrast decay).
    pub contrast_retention: f64,
    /// Whether the final split is drawn (false uses its expectation).
    pub projection_noise: bool,
    pub readout: ReadoutMode,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            mean_atoms: 1400.0,
            prep_sigma_atoms: 40.0,
            det_sigma_n1_atoms: 5.7,
            det_sigma_n2_atoms: 4.2,
            det_sigma_n_far: Some(6.5e-3),
            tech_sigma_hz: 0.15,
            meanfield_coeff_hz_per_atom: 5.1e-3,
            correction_enabled: true,
            correction_ref_atoms: None,
            imaging_gain: 1.0,
            contrast_retention: 1.0,
            projection_noise: true,
            readout: ReadoutMode::Auto,
        }
    }
}

impl NoiseModel {
    /// Projection noise only, at a fixed atom number.
    pub fn ideal(atoms: usize) -> Self {
        Self {
            mean_atoms: atoms as f64,
            prep_sigma_atoms: 0.0,
            det_sigma_n1_atoms: 0.0,
            det_sigma_n2_atoms: 0.0,
            det_sigma_n_far: None,
            tech_sigma_hz: 0.0,
            meanfield_coeff_hz_per_atom: 0.0,
            correction_enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("prep_sigma_atoms", self.prep_sigma_atoms),
            ("det_sigma_n1_atoms", self.det_sigma_n1_atoms),
            ("det_sigma_n2_atoms", self.det_sigma_n2_atoms),
            ("tech_sigma_hz", self.tech_sigma_hz),
            ("det_sigma_n_far", self.det_sigma_n_far.unwrap_or(0.0)),
        ];
        for (name, v) in sigmas {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and ≥ 0")));
            }
        }
        if !(self.mean_atoms >= 1.0 && self.mean_atoms.is_finite()) {
            return Err(Error::invalid("mean_atoms must be ≥ 1"));
        }
        if !self.meanfield_coeff_hz_per_atom.is_finite() {
            return Err(Error::invalid("meanfield_coeff_hz_per_atom must be finite"));
        }
        if !(self.imaging_gain > 0.0 && self.imaging_gain.is_finite()) {
            return Err(Error::invalid("imaging_gain must be positive"));
        }
        if !(self.contrast_retention > 0.0 && self.contrast_retention <= 1.0) {
            return Err(Error::invalid("contrast_retention must lie in (0, 1]"));
        }
        if let Some(r) = self.correction_ref_atoms {
            if !r.is_finite() {
                return Err(Error::invalid("correction_ref_atoms must be finite"));
            }
        }
        Ok(())
    }

    pub fn reference_atoms(&self) -> f64 {
        self.correction_ref_atoms.unwrap_or(self.mean_atoms)
    }

    /// Detection sigmas (N₁, N₂) in atoms at trap scaling `eta`.
    pub fn detection_sigmas(&self, eta: f64) -> (f64, f64) {
        let (s1, s2) = (self.det_sigma_n1_atoms, self.det_sigma_n2_atoms);
        let near = s1.hypot(s2);
        let Some(far) = self.det_sigma_n_far else { return (s1, s2) };
        if near == 0.0 {
            return (s1, s2);
        }
        let far_scale = far * self.mean_atoms / near;
        let t = ((1.0 - eta) / 0.5).clamp(0.0, 1.0);
        let scale = 1.0 + (far_scale - 1.0) * t;
        (s1 * scale, s2 * scale)
    }

    /// Detection noise in n at mid-fringe for `atoms` atoms.
    pub fn detection_sigma_n(&self, eta: f64, atoms: f64) -> f64 {
        let (s1, s2) = self.detection_sigmas(eta);
        s1.hypot(s2) / atoms
    }
}
