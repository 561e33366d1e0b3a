use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::engine::{prefix_moments, propagate_moments, Perturbation};
use super::{PulseSequence, SequenceStep};
use crate::error::{Error, Result};
use crate::spin::{antisqueezed_tilt, RotationSpec};

/// The three canonical sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    ScanningProbe,
    Fig3Squeezed,
    Fig3Coherent,
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scanning_probe" => Ok(Self::ScanningProbe),
            "fig3_squeezed" => Ok(Self::Fig3Squeezed),
            "fig3_coherent" => Ok(Self::Fig3Coherent),
            other => Err(Error::invalid(format!("unknown sequence kind '{other}'"))),
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ScanningProbe => "scanning_probe",
            Self::Fig3Squeezed => "fig3_squeezed",
            Self::Fig3Coherent => "fig3_coherent",
        })
    }
}

/// Rotation about x applied right after the twist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Fixed −12° about x.
    Paper,
    Degrees(f64),
    /// −β, with β the tilt of the anti-squeezed axis for the actual μ.
    Auto,
}

impl Alignment {
    pub const PAPER_DEG: f64 = -12.0;

    pub fn angle_rad(&self, atom_count: usize, mu: f64) -> f64 {
        match *self {
            Alignment::Paper => Self::PAPER_DEG.to_radians(),
            Alignment::Degrees(d) => d.to_radians(),
            Alignment::Auto if mu == 0.0 => 0.0,
            Alignment::Auto => -antisqueezed_tilt(atom_count, mu),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperParams {
    pub atom_count: usize,
    /// Twist strength μ = χT_S.
    pub mu_rad: f64,
    pub squeezing_time_s: f64,
    pub ramsey_time_s: f64,
    pub eta: f64,
    pub transport_time_s: f64,
    pub mw_duration_s: f64,
    pub mw_potential_hz: f64,
    pub alignment: Alignment,
    pub theta_rad: f64,
}

impl Default for PaperParams {
    fn default() -> Self {
        Self {
            atom_count: 1400,
            mu_rad: 0.0,
            squeezing_time_s: 23.4e-3,
            ramsey_time_s: 100e-6,
            eta: 0.5,
            transport_time_s: 20e-3,
            mw_duration_s: 80e-6,
            mw_potential_hz: 0.0,
            alignment: Alignment::Paper,
            theta_rad: 0.0,
        }
    }
}

/// Builds one of the canonical sequences. The readout is a π/2 pulse about
/// x, so n = C sin(φ + θ) for an accumulated phase φ.
pub fn build_paper_sequence(kind: SequenceKind, p: &PaperParams) -> Result<PulseSequence> {
    let n = p.atom_count;
    let prepare = SequenceStep::rotation(RotationSpec::about_y(-FRAC_PI_2));
    let twist = SequenceStep::Twist { mu_rad: p.mu_rad, duration_s: p.squeezing_time_s };
    let align = p.alignment.angle_rad(n, p.mu_rad);
    let readout = SequenceStep::rotation(RotationSpec::about_x(FRAC_PI_2));
    let steps = match kind {
        SequenceKind::ScanningProbe => {
            if p.ramsey_time_s < p.mw_duration_s {
                return Err(Error::invalid("Ramsey time must cover the microwave pulse"));
            }
            let half = 0.5 * (p.ramsey_time_s - p.mw_duration_s);
            let mut steps = vec![prepare, twist];
            if align != 0.0 {
                steps.push(SequenceStep::rotation(RotationSpec::about_x(align)));
            }
            steps.push(SequenceStep::Transport { duration_s: p.transport_time_s, from_eta: 1.0, to_eta: p.eta });
            let center = center_axis(n, &steps)?;
            steps.extend([
                SequenceStep::rotation(RotationSpec::new(center, FRAC_PI_2)?),
                SequenceStep::free(half),
                SequenceStep::MwPulse { duration_s: p.mw_duration_s, potential_hz: p.mw_potential_hz },
                SequenceStep::free(half),
            ]);
            steps
        }
        SequenceKind::Fig3Squeezed => vec![
            prepare,
            twist,
            SequenceStep::rotation(RotationSpec::about_x(align + FRAC_PI_2)),
            SequenceStep::free(p.ramsey_time_s),
        ],
        SequenceKind::Fig3Coherent => vec![prepare, SequenceStep::free(p.ramsey_time_s)],
    };
    let mut steps = steps;
    steps.push(readout);
    steps.push(SequenceStep::measure(p.theta_rad));
    PulseSequence::new(n, steps)
}

/// Equatorial axis through the projection of the mean spin after `steps`.
fn center_axis(atom_count: usize, steps: &[SequenceStep]) -> Result<[f64; 3]> {
    let partial = PulseSequence { version: super::SEQUENCE_SCHEMA_VERSION, atom_count, steps: steps.to_vec() };
    let split = super::nonlinear_prefix_len(&partial);
    let pert = Perturbation::default();
    let start = prefix_moments(&partial, atom_count, split, &pert)?;
    let m = propagate_moments(&partial, start, split, steps.len(), &pert, 1.0)?;
    let r = m.mean[0].hypot(m.mean[1]);
    if r < 1e-9 * m.spin() {
        return Err(Error::DegenerateState("mean spin has no equatorial projection".into()));
    }
    Ok([m.mean[0] / r, m.mean[1] / r, 0.0])
}
