use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{PulseSequence, SequenceStep};
use crate::error::{Error, Result};
use crate::spin::{coherent_state, moments, rotate, rotate_z, twist, DickeState, SpinMoments};

/// Frequency offsets present during one shot. Both default to zero, which is
/// the noiseless engine.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Perturbation {
    /// Quasi-static oscillator–atom detuning, Hz; acts during free
    /// evolution, microwave pulses and transport.
    pub detuning_hz: f64,
    /// Density-dependent interaction shift, Hz; acts during T_R only.
    pub interaction_shift_hz: f64,
}

/// Result of running a sequence without noise.
#[derive(Clone, Debug)]
pub struct SequenceOutcome {
    /// State immediately before the projective measurement.
    pub state: DickeState,
    /// ⟨n⟩ = 2⟨S_z⟩/N.
    pub expected_n: f64,
}

/// Expected fringe n(θ) = C sin(θ + φ) + offset over a θ scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeCurve {
    pub thetas: Vec<f64>,
    pub n: Vec<f64>,
    pub contrast: f64,
    pub phase: f64,
    pub offset: f64,
}

/// z-rotation angle picked up by a phase-carrying step, if any.
pub(crate) fn step_phase(step: &SequenceStep, pert: &Perturbation) -> Option<f64> {
    match *step {
        SequenceStep::FreeEvolution { duration_s, detuning_hz, extra_phase_rad } => Some(
            TAU * (detuning_hz + pert.detuning_hz + pert.interaction_shift_hz) * duration_s + extra_phase_rad,
        ),
        SequenceStep::MwPulse { duration_s, potential_hz } => {
            Some(TAU * (potential_hz + pert.detuning_hz + pert.interaction_shift_hz) * duration_s)
        }
        SequenceStep::Transport { duration_s, .. } => Some(TAU * pert.detuning_hz * duration_s),
        _ => None,
    }
}

/// Runs the noiseless sequence on the exact Dicke state.
pub fn run_sequence(seq: &PulseSequence) -> Result<SequenceOutcome> {
    run_sequence_at(seq, seq.atom_count, &Perturbation::default())
}

/// Runs the sequence for `atom_count` atoms with extra per-shot shifts.
pub fn run_sequence_at(seq: &PulseSequence, atom_count: usize, pert: &Perturbation) -> Result<SequenceOutcome> {
    seq.validate()?;
    let mut psi = DickeState::all_down(atom_count)?;
    for (i, step) in seq.steps.iter().enumerate() {
        psi = match step {
            SequenceStep::Rotation { .. } => rotate(&psi, &seq.effective_rotation(i)?),
            SequenceStep::Twist { mu_rad, .. } => twist(&psi, *mu_rad),
            SequenceStep::Measure { .. } => break,
            other => match step_phase(other, pert) {
                Some(phi) if phi != 0.0 => rotate_z(&psi, phi),
                _ => psi,
            },
        };
    }
    let expected_n = moments(&psi).expected_n();
    Ok(SequenceOutcome { state: psi, expected_n })
}

/// Number of leading steps that must be evaluated on the full state vector:
/// everything up to and including the last twist.
pub fn nonlinear_prefix_len(seq: &PulseSequence) -> usize {
    seq.steps
        .iter()
        .rposition(|s| matches!(s, SequenceStep::Twist { .. }))
        .map_or(0, |i| i + 1)
}

/// Moments after the first `len` steps, evaluated exactly.
///
/// While no twist has been applied the state stays spin-coherent, so it is
/// tracked as a direction and only materialised at the first twist. This
/// drops the global phase, which moments do not see.
pub fn prefix_moments(seq: &PulseSequence, atom_count: usize, len: usize, pert: &Perturbation) -> Result<SpinMoments> {
    if atom_count == 0 {
        return Err(Error::invalid("atom count must be at least 1"));
    }
    let s = atom_count as f64 / 2.0;
    let mut direction = [0.0, 0.0, -1.0];
    let mut psi: Option<DickeState> = None;
    for (i, step) in seq.steps.iter().enumerate().take(len) {
        match (step, psi.as_mut()) {
            (SequenceStep::Measure { .. }, _) => break,
            (SequenceStep::Rotation { .. }, None) => {
                direction = apply3(&seq.effective_rotation(i)?.matrix(), &direction);
            }
            (SequenceStep::Rotation { .. }, Some(state)) => {
                *state = rotate(state, &seq.effective_rotation(i)?);
            }
            (SequenceStep::Twist { mu_rad, .. }, current) => {
                let base = match current {
                    Some(state) => state.clone(),
                    None => {
                        let polar = direction[2].clamp(-1.0, 1.0).acos();
                        let azimuth = direction[1].atan2(direction[0]);
                        coherent_state(atom_count, polar, azimuth)?
                    }
                };
                psi = Some(twist(&base, *mu_rad));
            }
            (other, current) => {
                if let Some(phi) = step_phase(other, pert) {
                    match current {
                        Some(state) => *state = rotate_z(state, phi),
                        None => direction = apply3(&crate::spin::RotationSpec::about_z(phi).matrix(), &direction),
                    }
                }
            }
        }
    }
    Ok(match psi {
        Some(state) => moments(&state),
        None => coherent_moments(atom_count, &direction, s),
    })
}

fn coherent_moments(atom_count: usize, d: &[f64; 3], s: f64) -> SpinMoments {
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            covariance[i][j] = 0.5 * s * (delta - d[i] * d[j]);
        }
    }
    SpinMoments { atom_count, mean: d.map(|c| s * c), covariance }
}

fn apply3(r: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

/// Propagates moments through the linear steps `from..stop` (rotations and
/// phase steps). `retention < 1` applies per-atom dephasing right before
/// the readout pulse.
pub fn propagate_moments(
    seq: &PulseSequence,
    start: SpinMoments,
    from: usize,
    stop: usize,
    pert: &Perturbation,
    retention: f64,
) -> Result<SpinMoments> {
    let readout = seq.readout_index();
    let mut m = start;
    for (i, step) in seq.steps.iter().enumerate().take(stop).skip(from) {
        match step {
            SequenceStep::Rotation { .. } => {
                if Some(i) == readout && retention != 1.0 {
                    m = m.dephased(retention);
                }
                m = m.rotated(&seq.effective_rotation(i)?);
            }
            SequenceStep::Twist { .. } => {
                return Err(Error::invalid(format!("step {i}: twist cannot be propagated in moment space")));
            }
            SequenceStep::Measure { .. } => break,
            other => {
                if let Some(phi) = step_phase(other, pert) {
                    m = m.rotated_z(phi);
                }
            }
        }
    }
    Ok(m)
}

/// Moments right before the measurement, via the exact prefix and the
/// moment-space suffix.
pub fn final_moments(seq: &PulseSequence, atom_count: usize, pert: &Perturbation, retention: f64) -> Result<SpinMoments> {
    let split = nonlinear_prefix_len(seq);
    let start = prefix_moments(seq, atom_count, split, pert)?;
    propagate_moments(seq, start, split, seq.steps.len(), pert, retention)
}

/// Expected n(θ) for each θ, with contrast, phase and offset of the exact
/// sinusoid. `retention` is the optional contrast-decay knob (1 = off).
pub fn scan_theta(seq: &PulseSequence, thetas: &[f64], retention: f64) -> Result<FringeCurve> {
    scan_theta_with(seq, thetas, retention, &Perturbation::default())
}

/// As [`scan_theta`], for N = `seq.atom_count` under fixed frequency shifts.
pub fn scan_theta_with(seq: &PulseSequence, thetas: &[f64], retention: f64, pert: &Perturbation) -> Result<FringeCurve> {
    if thetas.len() < 3 {
        return Err(Error::invalid("a theta scan needs at least 3 values"));
    }
    seq.validate()?;
    let readout = seq
        .readout_index()
        .ok_or_else(|| Error::invalid("sequence has no readout rotation"))?;
    let split = nonlinear_prefix_len(seq);
    if split > readout {
        return Err(Error::invalid("the readout pulse must follow the last twist"));
    }
    let start = prefix_moments(seq, seq.atom_count, split, pert)?;
    let mut before = propagate_moments(seq, start, split, readout, pert, 1.0)?;
    if retention != 1.0 {
        before = before.dephased(retention);
    }
    // the readout at θ is Rz(−θ) R₀ Rz(θ); only its z row matters
    let r0 = seq.effective_rotation_with_theta(readout, 0.0)?.matrix();
    let v = before.mean;
    let s = before.spin();
    let a = (r0[2][0] * v[0] + r0[2][1] * v[1]) / s;
    let b = (-r0[2][0] * v[1] + r0[2][1] * v[0]) / s;
    let offset = r0[2][2] * v[2] / s;
    let n = thetas.iter().map(|t| a * t.cos() + b * t.sin() + offset).collect();
    Ok(FringeCurve { thetas: thetas.to_vec(), n, contrast: a.hypot(b), phase: a.atan2(b), offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::RotationSpec;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ramsey(n: usize, detuning: f64, theta: f64) -> PulseSequence {
        PulseSequence::new(
            n,
            vec![
                SequenceStep::rotation(RotationSpec::about_y(-FRAC_PI_2)),
                SequenceStep::FreeEvolution { duration_s: 1e-3, detuning_hz: detuning, extra_phase_rad: 0.0 },
                SequenceStep::rotation(RotationSpec::about_x(FRAC_PI_2)),
                SequenceStep::measure(theta),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_half_pulses_transfer_everything() {
        let seq = PulseSequence::new(
            4,
            vec![
                SequenceStep::rotation(RotationSpec::about_y(FRAC_PI_2)),
                SequenceStep::rotation(RotationSpec::about_y(FRAC_PI_2)),
                SequenceStep::measure(0.0),
            ],
        )
        .unwrap();
        assert!((run_sequence(&seq).unwrap().expected_n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_ramsey_fringe() {
        for &theta in &[0.0, 0.4, FRAC_PI_2, 2.0, PI] {
            let n = run_sequence(&ramsey(20, 0.0, theta)).unwrap().expected_n;
            assert!((n - theta.sin()).abs() < 1e-12, "theta {theta}: {n}");
        }
        // 100 Hz for 1 ms is a phase of 0.2π
        let n = run_sequence(&ramsey(20, 100.0, 0.0)).unwrap().expected_n;
        assert!((n - (0.2 * PI).sin()).abs() < 1e-12);
    }

    #[test]
    fn scan_matches_engine() {
        let seq = ramsey(30, 70.0, 0.0);
        let thetas = [0.0, 1.0, 2.0, 3.0];
        let curve = scan_theta(&seq, &thetas, 1.0).unwrap();
        for (t, n) in thetas.iter().zip(&curve.n) {
            let direct = run_sequence(&seq.with_theta(*t)).unwrap().expected_n;
            assert!((direct - n).abs() < 1e-12);
        }
        assert!((curve.contrast - 1.0).abs() < 1e-12);
        assert!((curve.phase - TAU * 0.07).abs() < 1e-12);
        assert!(scan_theta(&seq, &thetas[..2], 1.0).is_err());
    }

    #[test]
    fn moment_path_agrees_with_state_path() {
        let mut seq = ramsey(40, 30.0, 0.3);
        seq.steps.insert(1, SequenceStep::Twist { mu_rad: 0.02, duration_s: 0.0 });
        seq.steps.insert(2, SequenceStep::rotation(RotationSpec::about_x(-0.3)));
        let pert = Perturbation { detuning_hz: 5.0, interaction_shift_hz: 2.0 };
        let exact = moments(&run_sequence_at(&seq, 40, &pert).unwrap().state);
        let fast = final_moments(&seq, 40, &pert, 1.0).unwrap();
        for i in 0..3 {
            assert!((exact.mean[i] - fast.mean[i]).abs() < 1e-9);
            for j in 0..3 {
                assert!((exact.covariance[i][j] - fast.covariance[i][j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_length_free_evolution_is_a_no_op() {
        let mut seq = ramsey(12, 10.0, 0.7);
        seq.steps[0] = SequenceStep::rotation(RotationSpec::about_y(-1.0));
        let base = run_sequence(&seq).unwrap();
        seq.steps.insert(1, SequenceStep::free(0.0));
        let with = run_sequence(&seq).unwrap();
        assert_eq!(base.state, with.state);
    }
}
