use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::RotationSpec;

/// Current schema version of serialised sequences.
pub const SEQUENCE_SCHEMA_VERSION: u32 = 1;

/// Allowed trap-scaling range for transport steps.
pub const ETA_RANGE: (f64, f64) = (0.5, 1.0);

/// One entry of a pulse sequence. Field names carry their units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceStep {
    /// Instantaneous rotation. `phase_offset_rad` turns the axis about z by
    /// −offset, which advances the fringe (n = C sin(φ + offset) for a
    /// readout pulse about x).
    Rotation {
        axis: [f64; 3],
        angle_rad: f64,
        #[serde(default)]
        phase_offset_rad: f64,
    },
    /// One-axis twisting exp(−iμS_z²), μ = χT_S.
    Twist {
        mu_rad: f64,
        /// Duration of the squeezing interval; informational only.
        #[serde(default)]
        duration_s: f64,
    },
    /// Free precession: rotate_z by 2π·detuning·duration + extra phase.
    FreeEvolution {
        duration_s: f64,
        #[serde(default)]
        detuning_hz: f64,
        #[serde(default)]
        extra_phase_rad: f64,
    },
    /// Trap transport between two η values; phase-neutral when noiseless.
    Transport { duration_s: f64, from_eta: f64, to_eta: f64 },
    /// Microwave near-field pulse producing a differential shift V_mw/h.
    MwPulse { duration_s: f64, potential_hz: f64 },
    /// Terminal projective measurement; `theta_rad` is added to the phase
    /// offset of the last rotation before it (the readout pulse).
    Measure {
        #[serde(default)]
        theta_rad: f64,
    },
}

impl SequenceStep {
    pub fn rotation(rot: RotationSpec) -> Self {
        SequenceStep::Rotation { axis: rot.axis(), angle_rad: rot.angle(), phase_offset_rad: 0.0 }
    }

    pub fn free(duration_s: f64) -> Self {
        SequenceStep::FreeEvolution { duration_s, detuning_hz: 0.0, extra_phase_rad: 0.0 }
    }

    pub fn measure(theta_rad: f64) -> Self {
        SequenceStep::Measure { theta_rad }
    }

    /// Time during which the Ramsey phase accumulates (free evolution and
    /// microwave pulses).
    pub fn ramsey_duration(&self) -> f64 {
        match self {
            SequenceStep::FreeEvolution { duration_s, .. } | SequenceStep::MwPulse { duration_s, .. } => {
                *duration_s
            }
            _ => 0.0,
        }
    }
}

/// Ordered list of steps acting on N atoms that start in |1⟩.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    #[serde(default = "default_version")]
    pub version: u32,
    pub atom_count: usize,
    pub steps: Vec<SequenceStep>,
}

fn default_version() -> u32 {
    SEQUENCE_SCHEMA_VERSION
}

impl PulseSequence {
    pub fn new(atom_count: usize, steps: Vec<SequenceStep>) -> Result<Self> {
        let seq = Self { version: SEQUENCE_SCHEMA_VERSION, atom_count, steps };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |step: usize, reason: &str| Err(Error::Validation { step, reason: reason.into() });
        if self.version != SEQUENCE_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported sequence version {}", self.version)));
        }
        if self.atom_count == 0 {
            return Err(Error::invalid("atom count must be at least 1"));
        }
        let Some(last) = self.steps.len().checked_sub(1) else {
            return Err(Error::invalid("sequence has no steps"));
        };
        let mut eta = ETA_RANGE.1;
        let mut direction = 0.0f64;
        let mut seen_rotation = false;
        for (i, step) in self.steps.iter().enumerate() {
            match *step {
                SequenceStep::Rotation { axis, angle_rad, phase_offset_rad } => {
                    if RotationSpec::new(axis, angle_rad).is_err() || !phase_offset_rad.is_finite() {
                        return fail(i, "rotation needs a nonzero finite axis and finite angles");
                    }
                    seen_rotation = true;
                }
                SequenceStep::Twist { mu_rad, duration_s } => {
                    if !mu_rad.is_finite() || !(duration_s >= 0.0 && duration_s.is_finite()) {
                        return fail(i, "twist strength must be finite and duration non-negative");
                    }
                }
                SequenceStep::FreeEvolution { duration_s, detuning_hz, extra_phase_rad } => {
                    if !(duration_s >= 0.0 && duration_s.is_finite()) {
                        return fail(i, "duration must be finite and non-negative");
                    }
                    if !detuning_hz.is_finite() || !extra_phase_rad.is_finite() {
                        return fail(i, "detuning and extra phase must be finite");
                    }
                }
                SequenceStep::Transport { duration_s, from_eta, to_eta } => {
                    if !(duration_s >= 0.0 && duration_s.is_finite()) {
                        return fail(i, "duration must be finite and non-negative");
                    }
                    let in_range = |e: f64| (ETA_RANGE.0..=ETA_RANGE.1).contains(&e);
                    if !in_range(from_eta) || !in_range(to_eta) {
                        return fail(i, "eta must lie in [0.5, 1]");
                    }
                    if (from_eta - eta).abs() > 1e-12 {
                        return fail(i, "transport must start where the previous one ended");
                    }
                    let step_dir = to_eta - from_eta;
                    if step_dir * direction < 0.0 {
                        return fail(i, "transport eta must change monotonically");
                    }
                    if step_dir != 0.0 {
                        direction = step_dir;
                    }
                    eta = to_eta;
                }
                SequenceStep::MwPulse { duration_s, potential_hz } => {
                    if !(duration_s >= 0.0 && duration_s.is_finite()) || !potential_hz.is_finite() {
                        return fail(i, "mw pulse needs a finite non-negative duration and finite potential");
                    }
                }
                SequenceStep::Measure { theta_rad } => {
                    if i != last {
                        return fail(i, "measure must be the final step");
                    }
                    if !theta_rad.is_finite() {
                        return fail(i, "theta must be finite");
                    }
                    if theta_rad != 0.0 && !seen_rotation {
                        return fail(i, "a nonzero theta needs a readout rotation before the measurement");
                    }
                }
            }
        }
        if !matches!(self.steps[last], SequenceStep::Measure { .. }) {
            return fail(last, "sequence must end with a measure step");
        }
        Ok(())
    }

    /// θ of the terminal measurement.
    pub fn theta(&self) -> f64 {
        match self.steps.last() {
            Some(SequenceStep::Measure { theta_rad }) => *theta_rad,
            _ => 0.0,
        }
    }

    /// Copy with the measurement θ replaced.
    pub fn with_theta(&self, theta: f64) -> Self {
        let mut out = self.clone();
        if let Some(SequenceStep::Measure { theta_rad }) = out.steps.last_mut() {
            *theta_rad = theta;
        }
        out
    }

    /// Index of the readout pulse (last rotation before the measurement).
    pub fn readout_index(&self) -> Option<usize> {
        self.steps.iter().rposition(|s| matches!(s, SequenceStep::Rotation { .. }))
    }

    /// Rotation performed by step `index`, including the measurement θ when
    /// it is the readout pulse.
    pub fn effective_rotation(&self, index: usize) -> Result<RotationSpec> {
        self.effective_rotation_with_theta(index, self.theta())
    }

    pub(crate) fn effective_rotation_with_theta(&self, index: usize, theta: f64) -> Result<RotationSpec> {
        let SequenceStep::Rotation { axis, angle_rad, phase_offset_rad } = self.steps[index] else {
            return Err(Error::invalid(format!("step {index} is not a rotation")));
        };
        let offset = phase_offset_rad + if Some(index) == self.readout_index() { theta } else { 0.0 };
        let (s, c) = (-offset).sin_cos();
        let turned = [c * axis[0] - s * axis[1], s * axis[0] + c * axis[1], axis[2]];
        RotationSpec::new(turned, angle_rad)
    }

    /// Σ of free-evolution and microwave-pulse durations (T_R).
    pub fn ramsey_time(&self) -> f64 {
        self.steps.iter().map(SequenceStep::ramsey_duration).sum()
    }

    /// T_R plus transport time: the interval exposed to technical noise.
    pub fn exposed_time(&self) -> f64 {
        self.ramsey_time()
            + self
                .steps
                .iter()
                .map(|s| match s {
                    SequenceStep::Transport { duration_s, .. } => *duration_s,
                    _ => 0.0,
                })
                .sum::<f64>()
    }

    /// η at the measurement position.
    pub fn final_eta(&self) -> f64 {
        self.steps
            .iter()
            .filter_map(|s| match s {
                SequenceStep::Transport { to_eta, .. } => Some(*to_eta),
                _ => None,
            })
            .last()
            .unwrap_or(ETA_RANGE.1)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let seq: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        seq.validate()?;
        Ok(seq)
    }
}
