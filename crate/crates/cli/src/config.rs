use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use scanprobe::chip::ChipConfig;
use scanprobe::estimation::{Interrogation, Polarization};
use scanprobe::noise::NoiseModel;
use scanprobe::sequence::Alignment;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a command needs. Physical quantities carry their unit in the
/// key name; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    /// Shots per measured point.
    pub shots: usize,
    pub output_dir: PathBuf,
    /// Chip geometry file; the built-in calibrated chip when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chip: Option<PathBuf>,
    pub noise: NoiseModel,
    pub squeeze: SqueezeConfig,
    pub fig3: Fig3Config,
    pub scan: ScanConfig,
    pub sensitivity: SensitivityConfig,
    pub calibrate: CalibrateConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            seed: 1,
            shots: 240,
            output_dir: PathBuf::from("out"),
            chip: None,
            noise: NoiseModel::default(),
            squeeze: SqueezeConfig::default(),
            fig3: Fig3Config::default(),
            scan: ScanConfig::default(),
            sensitivity: SensitivityConfig::default(),
            calibrate: CalibrateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqueezeConfig {
    pub atom_count: usize,
    pub target_db: f64,
    pub curve_points: usize,
    /// The ξ²(μ) curve spans 0 … this multiple of the optimal μ.
    pub curve_span: f64,
    /// Emit a Wigner raster of the calibrated state (N ≤ 256 only).
    pub wigner: bool,
    pub wigner_polar_points: usize,
    pub wigner_azimuth_points: usize,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self {
            atom_count: 1400,
            target_db: -4.3,
            curve_points: 101,
            curve_span: 2.0,
            wigner: true,
            wigner_polar_points: 61,
            wigner_azimuth_points: 121,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Config {
    pub target_db: f64,
    pub alignment: Alignment,
    pub squeezing_time_s: f64,
    pub ramsey_times_s: Vec<f64>,
    /// Overrides the detection noise in n at the mean atom number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_sigma_n: Option<f64>,
    pub repetitions: usize,
    /// Points with T_R up to this are averaged into the short-time figure.
    pub short_time_s: f64,
    /// Constant squeezing of the dashed model curve.
    pub model_squeezed_db: f64,
    pub model_coherent_db: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            target_db: -4.3,
            alignment: Alignment::Auto,
            squeezing_time_s: 23.4e-3,
            ramsey_times_s: [0.1, 2.0, 5.0, 8.0, 11.0, 14.0, 17.0, 20.0, 25.0, 30.0].map(|t| t * 1e-3).to_vec(),
            det_sigma_n: Some(5.1e-3),
            repetitions: 1,
            short_time_s: 2e-3,
            model_squeezed_db: -4.0,
            model_coherent_db: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub etas: Vec<f64>,
    pub target_db: f64,
    pub alignment: Alignment,
    pub squeezing_time_s: f64,
    pub transport_time_s: f64,
    pub ramsey_time_s: f64,
    pub mw_duration_s: f64,
    /// Overrides the chip's microwave current.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mw_current_rms_a: Option<f64>,
    /// θ values per fringe; the shots of a fringe are split evenly.
    pub thetas: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            etas: (0..21).map(|i| (40 - i) as f64 / 40.0).collect(),
            target_db: -4.3,
            alignment: Alignment::Paper,
            squeezing_time_s: 23.4e-3,
            transport_time_s: 20e-3,
            ramsey_time_s: 100e-6,
            mw_duration_s: 80e-6,
            mw_current_rms_a: None,
            thetas: 8,
        }
    }
}

/// At most one of `sigma_phi_rad`, `delta_nu_hz`, `sql_atoms` or `dataset`
/// selects the input; without any, σφ is the SQL at `noise.mean_atoms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_phi_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_nu_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sql_atoms: Option<f64>,
    /// A dataset JSON written by `fig3` or `scan`, taken at mid-fringe.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Ignored for dataset input, whose sequence fixes the time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interrogation_time_s: Option<f64>,
    pub interrogation: Interrogation,
    pub cycle_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization: Option<Polarization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_field_t: Option<f64>,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            sigma_phi_rad: None,
            delta_nu_hz: None,
            sql_atoms: None,
            dataset: None,
            interrogation_time_s: Some(20e-3),
            interrogation: Interrogation::Free,
            cycle_time_s: 11.0,
            polarization: None,
            operating_field_t: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateConfig {
    pub atom_grid: Vec<f64>,
    pub alpha: f64,
    pub repetitions: usize,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self { atom_grid: (0..7).map(|i| 400.0 + 200.0 * i as f64).collect(), alpha: 0.82, repetitions: 20 }
    }
}

impl ScenarioConfig {
    /// Reads a TOML file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [cfg.chip.as_mut(), cfg.sensitivity.dataset.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical TOML form, output directory excluded.
    pub fn hash(&self) -> Result<String> {
        let canonical = Self { output_dir: PathBuf::new(), ..self.clone() };
        let digest = Sha256::digest(canonical.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.shots >= 1, "shots must be at least 1");
        self.noise.validate()?;
        if let Some(chip) = &self.chip {
            ensure!(chip.is_file(), "chip file {} does not exist", chip.display());
        }
        if let Some(d) = &self.sensitivity.dataset {
            ensure!(d.is_file(), "dataset {} does not exist", d.display());
        }
        let f = &self.fig3;
        ensure!(!f.ramsey_times_s.is_empty(), "fig3.ramsey_times_s is empty");
        ensure!(f.ramsey_times_s.iter().all(|t| *t >= 0.0 && t.is_finite()), "Ramsey times must be ≥ 0");
        ensure!(f.repetitions >= 1, "fig3.repetitions must be at least 1");
        if let Some(s) = f.det_sigma_n {
            ensure!(s >= 0.0 && s.is_finite(), "fig3.det_sigma_n must be ≥ 0");
        }
        let s = &self.scan;
        ensure!(!s.etas.is_empty(), "scan.etas is empty");
        ensure!(s.thetas >= 4, "scan.thetas must be at least 4");
        ensure!(self.calibrate.repetitions >= 1, "calibrate.repetitions must be at least 1");
        ensure!(self.calibrate.alpha > 0.0, "calibrate.alpha must be positive");
        ensure!(self.squeeze.curve_points >= 2, "squeeze.curve_points must be at least 2");
        Ok(())
    }

    pub fn chip_config(&self) -> Result<ChipConfig> {
        match &self.chip {
            None => Ok(ChipConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(ChipConfig::from_toml(&text)?)
            }
        }
    }

    /// The noise model with the `fig3` detection override applied.
    pub fn fig3_noise(&self) -> Result<NoiseModel> {
        let mut noise = self.noise.clone();
        if let Some(target) = self.fig3.det_sigma_n {
            let (s1, s2) = (noise.det_sigma_n1_atoms, noise.det_sigma_n2_atoms);
            let total = target * noise.mean_atoms;
            let near = s1.hypot(s2);
            if near > 0.0 {
                noise.det_sigma_n1_atoms = s1 * total / near;
                noise.det_sigma_n2_atoms = s2 * total / near;
            } else {
                noise.det_sigma_n1_atoms = total / 2f64.sqrt();
                noise.det_sigma_n2_atoms = total / 2f64.sqrt();
            }
            noise.det_sigma_n_far = None;
        }
        Ok(noise)
    }

    /// Mean atom number as an integer.
    pub fn atoms(&self) -> Result<usize> {
        let n = self.noise.mean_atoms.round();
        if n < 2.0 {
            bail!("noise.mean_atoms must be at least 2");
        }
        Ok(n as usize)
    }
}
