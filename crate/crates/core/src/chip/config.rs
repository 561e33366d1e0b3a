use serde::{Deserialize, Serialize};

use super::field::{ChipGeometry, WireRole, WireSegment};
use super::trap::{find_trap, TrapSolution};
use crate::constants::MW_RMS_TO_PEAK;
use crate::error::{Error, Result};
use crate::sequence::ETA_RANGE;

pub const CHIP_CONFIG_VERSION: u32 = 1;

const DEFAULT_CHIP: &str = include_str!("../../data/chip_default.toml");

/// Which supply a configured wire is connected to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireGroup {
    /// Carries `weight`·I_L, scaled as η².
    LWire,
    /// Carries `weight`·I_D, scaled as η⁴.
    Dimple,
    /// Carries `weight` times the microwave phasor amplitude.
    Mw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigWire {
    pub name: String,
    pub group: WireGroup,
    pub start_m: [f64; 3],
    pub end_m: [f64; 3],
    pub weight: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

/// Chip description at η = 1 plus the η-scaling laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipConfig {
    pub version: u32,
    pub l_wire_current_a: f64,
    pub dimple_current_a: f64,
    pub bias_x_t: f64,
    pub bias_y_t: f64,
    pub bias_z_t: f64,
    /// Microwave drive, rms; converted to a peak phasor amplitude.
    pub mw_current_rms_a: f64,
    /// Starting point of the trap search at η = 1, m.
    pub trap_guess_m: [f64; 3],
    /// Probe (condensate) radii R_x, R_y, R_z, m.
    pub probe_radii_m: [f64; 3],
    pub wires: Vec<ConfigWire>,
}

/// Currents and fields at one η.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub eta: f64,
    pub l_wire_current_a: f64,
    pub dimple_current_a: f64,
    pub bias_t: [f64; 3],
    pub probe_radii_m: [f64; 3],
}

impl Default for ChipConfig {
    /// The shipped, calibrated geometry.
    fn default() -> Self {
        Self::from_toml(DEFAULT_CHIP).expect("embedded chip configuration is valid")
    }
}

impl ChipConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CHIP_CONFIG_VERSION {
            return Err(Error::Parse(format!("unsupported chip config version {}", self.version)));
        }
        let scalars = [
            self.l_wire_current_a,
            self.dimple_current_a,
            self.bias_x_t,
            self.bias_y_t,
            self.bias_z_t,
            self.mw_current_rms_a,
        ];
        if scalars.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("chip currents and fields must be finite"));
        }
        for w in &self.wires {
            let len = (0..3).map(|k| (w.end_m[k] - w.start_m[k]).powi(2)).sum::<f64>().sqrt();
            if !(len > 0.0) || !w.weight.is_finite() {
                return Err(Error::invalid(format!("wire '{}' needs nonzero length and a finite weight", w.name)));
            }
        }
        Ok(())
    }

    pub fn trap_config(&self, eta: f64) -> Result<TrapConfig> {
        if !(ETA_RANGE.0..=ETA_RANGE.1).contains(&eta) {
            return Err(Error::invalid(format!("eta = {eta} outside [{}, {}]", ETA_RANGE.0, ETA_RANGE.1)));
        }
        Ok(TrapConfig {
            eta,
            l_wire_current_a: self.l_wire_current_a * eta * eta,
            dimple_current_a: self.dimple_current_a * eta.powi(4),
            bias_t: [self.bias_x_t, self.bias_y_t * eta, self.bias_z_t * eta],
            probe_radii_m: self.probe_radii_m,
        })
    }

    /// Filament geometry at `eta` with the configured microwave drive.
    pub fn geometry(&self, eta: f64) -> Result<ChipGeometry> {
        self.geometry_with_mw(eta, self.mw_current_rms_a)
    }

    pub fn geometry_with_mw(&self, eta: f64, mw_current_rms_a: f64) -> Result<ChipGeometry> {
        let t = self.trap_config(eta)?;
        let segments = self
            .wires
            .iter()
            .map(|w| {
                let (current, role) = match w.group {
                    WireGroup::LWire => (w.weight * t.l_wire_current_a, WireRole::Dc),
                    WireGroup::Dimple => (w.weight * t.dimple_current_a, WireRole::Dc),
                    WireGroup::Mw => (w.weight * mw_current_rms_a * MW_RMS_TO_PEAK, WireRole::Mw),
                };
                WireSegment { start_m: w.start_m, end_m: w.end_m, current_a: current, role, phase_rad: w.phase_rad }
            })
            .collect();
        Ok(ChipGeometry { segments, bias_t: t.bias_t })
    }

    /// Trap-search seed at `eta`, assuming distances scale with η.
    pub fn trap_guess(&self, eta: f64) -> [f64; 3] {
        self.trap_guess_m.map(|c| c * eta)
    }

    pub fn find_trap(&self, eta: f64) -> Result<TrapSolution> {
        find_trap(&self.geometry(eta)?, self.trap_guess(eta))
    }
}

/// Scaled currents and fields of the default chip.
pub fn eta_config(eta: f64) -> Result<TrapConfig> {
    ChipConfig::default().trap_config(eta)
}
