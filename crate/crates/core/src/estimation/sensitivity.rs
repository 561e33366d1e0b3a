use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::constants::{
    ACZ_PI_HZ_PER_G2, ACZ_SIGMA_MINUS_HZ_PER_G2, ACZ_SIGMA_PLUS_HZ_PER_G2, BOHR_MAGNETON_HZ_PER_T, GAUSS,
};
use crate::error::{Error, Result};

/// Which interval the phase accumulated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interrogation {
    /// The microwave pulse length T_mw.
    Pulse,
    /// The full Ramsey time T_R.
    Free,
}

/// Microwave polarisation component driving the ac-Zeeman shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Pi,
    SigmaPlus,
    SigmaMinus,
}

impl Polarization {
    /// Differential shift coefficient, Hz/T².
    pub fn coefficient_hz_per_t2(self) -> f64 {
        let per_g2 = match self {
            Polarization::Pi => ACZ_PI_HZ_PER_G2,
            Polarization::SigmaPlus => ACZ_SIGMA_PLUS_HZ_PER_G2,
            Polarization::SigmaMinus => ACZ_SIGMA_MINUS_HZ_PER_G2,
        };
        per_g2 / (GAUSS * GAUSS)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticOptions {
    pub polarization: Polarization,
    /// Microwave amplitude around which the shift is linearised, T.
    pub operating_field_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub sigma_phi_rad: f64,
    pub interrogation_time_s: f64,
    pub interrogation: Interrogation,
    pub delta_nu_hz: f64,
    /// h·δν/μ_B.
    pub delta_b_nearres_t: f64,
    /// δν/(2kB) at the operating field, when requested.
    pub delta_b_quadratic_t: Option<f64>,
    pub per_root_hz_t: f64,
    pub cycle_time_s: f64,
}

pub fn sensitivity_report(
    sigma_phi_rad: f64,
    interrogation_time_s: f64,
    cycle_time_s: f64,
    interrogation: Interrogation,
    quadratic: Option<QuadraticOptions>,
) -> Result<SensitivityReport> {
    if !(sigma_phi_rad > 0.0) || !(interrogation_time_s > 0.0) {
        return Err(Error::invalid("σφ and the interrogation time must be positive"));
    }
    if !(cycle_time_s > 0.0) {
        return Err(Error::invalid("cycle time must be positive"));
    }
    let delta_nu_hz = sigma_phi_rad / (TAU * interrogation_time_s);
    let delta_b_nearres_t = delta_nu_hz / BOHR_MAGNETON_HZ_PER_T;
    let delta_b_quadratic_t = match quadratic {
        None => None,
        Some(q) => {
            let b = q.operating_field_t.ok_or(Error::MissingParameter("operating_field_t"))?;
            if !(b > 0.0) {
                return Err(Error::invalid("operating field must be positive"));
            }
            Some(delta_nu_hz / (2.0 * q.polarization.coefficient_hz_per_t2() * b))
        }
    };
    Ok(SensitivityReport {
        sigma_phi_rad,
        interrogation_time_s,
        interrogation,
        delta_nu_hz,
        delta_b_nearres_t,
        delta_b_quadratic_t,
        per_root_hz_t: delta_b_nearres_t * cycle_time_s.sqrt(),
        cycle_time_s,
    })
}
