use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::model::AUTO_EXACT_LIMIT;
use super::{Dataset, NoiseModel, ReadoutMode, ShotRecord, DATASET_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::sequence::{
    nonlinear_prefix_len, prefix_moments, propagate_moments, run_sequence_at, scan_theta_with, Perturbation,
    PulseSequence, SequenceStep,
};
use crate::spin::{measure_distribution, SpinMoments};

/// Independent random streams of one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Preparation = 0,
    Technical = 1,
    Projection = 2,
    DetectionN1 = 3,
    DetectionN2 = 4,
}

/// Seed of shot `index`: a Weyl sequence over the base seed, so index 0
/// uses the base seed itself.
pub fn shot_seed(base_seed: u64, index: u64) -> u64 {
    base_seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn stream(seed: u64, channel: Channel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    }
}

/// Undoes the density-dependent phase of one shot, relative to
/// `ref_atoms`, using the detected atom number. Returns the corrected n.
pub fn mean_field_correct(
    record: &ShotRecord,
    coeff_hz_per_atom: f64,
    ref_atoms: f64,
    ramsey_time_s: f64,
    contrast: f64,
) -> Result<f64> {
    if !(contrast > 0.0) {
        return Err(Error::invalid("cannot infer a phase at zero contrast"));
    }
    let shift = TAU * coeff_hz_per_atom * (record.detected_total() - ref_atoms) * ramsey_time_s;
    if shift == 0.0 {
        return Ok(record.n_raw);
    }
    let phi = (record.n_raw / contrast).clamp(-1.0, 1.0).asin();
    Ok(contrast * (phi - shift).sin())
}

/// Per-sequence state shared by all shots of one experiment.
pub struct ShotSampler {
    seq: PulseSequence,
    noise: NoiseModel,
    split: usize,
    cache_prefix: bool,
    prefix_cache: Mutex<HashMap<usize, SpinMoments>>,
    nominal_contrast: f64,
    ramsey_time: f64,
    exposed_time: f64,
    detection: (f64, f64),
}

impl ShotSampler {
    pub fn new(seq: &PulseSequence, noise: &NoiseModel) -> Result<Self> {
        seq.validate()?;
        noise.validate()?;
        if noise.readout == ReadoutMode::Exact && noise.contrast_retention != 1.0 {
            return Err(Error::invalid("exact readout cannot model contrast decay"));
        }
        let split = nonlinear_prefix_len(seq);
        let cache_prefix = !seq.steps[..split].iter().any(|s| {
            matches!(s, SequenceStep::FreeEvolution { .. } | SequenceStep::MwPulse { .. } | SequenceStep::Transport { .. })
        });
        let mean_seq = PulseSequence { atom_count: noise.mean_atoms.round() as usize, ..seq.clone() };
        let nominal_contrast = scan_theta_with(&mean_seq, &[0.0, 1.0, 2.0], noise.contrast_retention, &Perturbation::default())
            .map(|c| c.contrast)
            .unwrap_or(0.0);
        Ok(Self {
            seq: seq.clone(),
            noise: noise.clone(),
            split,
            cache_prefix,
            prefix_cache: Mutex::new(HashMap::new()),
            nominal_contrast,
            ramsey_time: seq.ramsey_time(),
            exposed_time: seq.exposed_time(),
            detection: noise.detection_sigmas(seq.final_eta()),
        })
    }

    pub fn nominal_contrast(&self) -> f64 {
        self.nominal_contrast
    }

    /// θ putting the mean-atom-number fringe at n = 0 on its rising slope,
    /// including the mean interaction phase.
    pub fn mid_fringe_theta(&self) -> Result<f64> {
        let mean = self.noise.mean_atoms.round() as usize;
        let seq = PulseSequence { atom_count: mean, ..self.seq.clone() };
        let pert = Perturbation { detuning_hz: 0.0, interaction_shift_hz: self.noise.meanfield_coeff_hz_per_atom * mean as f64 };
        let c = scan_theta_with(&seq, &[0.0, 1.0, 2.0], self.noise.contrast_retention, &pert)?;
        if c.contrast <= c.offset.abs() {
            return Err(Error::DegenerateState("fringe never crosses n = 0".into()));
        }
        let theta = (-c.offset / c.contrast).asin() - c.phase;
        Ok(theta.sin().atan2(theta.cos()))
    }

    fn use_exact(&self, atoms: usize) -> bool {
        match self.noise.readout {
            ReadoutMode::Exact => true,
            ReadoutMode::Gaussian => false,
            ReadoutMode::Auto => atoms <= AUTO_EXACT_LIMIT && self.noise.contrast_retention == 1.0,
        }
    }

    fn final_moments(&self, atoms: usize, pert: &Perturbation) -> Result<SpinMoments> {
        let start = if self.cache_prefix {
            let cached = self.prefix_cache.lock().ok().and_then(|c| c.get(&atoms).cloned());
            match cached {
                Some(m) => m,
                None => {
                    let m = prefix_moments(&self.seq, atoms, self.split, pert)?;
                    if let Ok(mut c) = self.prefix_cache.lock() {
                        c.insert(atoms, m.clone());
                    }
                    m
                }
            }
        } else {
            prefix_moments(&self.seq, atoms, self.split, pert)?
        };
        propagate_moments(&self.seq, start, self.split, self.seq.steps.len(), pert, self.noise.contrast_retention)
    }

    /// Draws shot `index` with its own `seed`.
    pub fn sample(&self, index: u64, seed: u64) -> Result<ShotRecord> {
        let nm = &self.noise;
        let mut prep = stream(seed, Channel::Preparation);
        let atoms = (nm.mean_atoms + gaussian(&mut prep, nm.prep_sigma_atoms)).round().max(1.0) as usize;
        let detuning = gaussian(&mut stream(seed, Channel::Technical), nm.tech_sigma_hz);
        let shift = nm.meanfield_coeff_hz_per_atom * atoms as f64;
        let pert = Perturbation { detuning_hz: detuning, interaction_shift_hz: shift };
        let mut proj = stream(seed, Channel::Projection);
        let total = atoms as f64;

        let true_n2 = if self.use_exact(atoms) {
            let state = run_sequence_at(&self.seq, atoms, &pert)?.state;
            let dist = measure_distribution(&state);
            if nm.projection_noise {
                let u: f64 = proj.random();
                let mut acc = 0.0;
                let mut pick = dist.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                for (k, p) in dist.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                pick as f64
            } else {
                dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
            }
        } else {
            let m = self.final_moments(atoms, &pert)?;
            let mean = 0.5 * total + m.mean[2];
            if nm.projection_noise {
                (mean + gaussian(&mut proj, m.covariance[2][2].max(0.0).sqrt())).round().clamp(0.0, total)
            } else {
                mean
            }
        };

        let (s1, s2) = self.detection;
        let mut n1 = nm.imaging_gain * (total - true_n2) + gaussian(&mut stream(seed, Channel::DetectionN1), s1);
        let mut n2 = nm.imaging_gain * true_n2 + gaussian(&mut stream(seed, Channel::DetectionN2), s2);
        let clamped = n1 < 0.0 || n2 < 0.0;
        n1 = n1.max(0.0);
        n2 = n2.max(0.0);
        let sum = n1 + n2;
        let n_raw = if sum > 0.0 { (n2 - n1) / sum } else { 0.0 };
        let mut record = ShotRecord {
            index,
            seed,
            theta_rad: self.seq.theta(),
            true_atoms: atoms,
            true_n2,
            n1_detected: n1,
            n2_detected: n2,
            tech_phase_rad: TAU * detuning * self.exposed_time,
            meanfield_phase_rad: TAU * shift * self.ramsey_time,
            n_raw,
            n: n_raw,
            clamped,
        };
        if nm.correction_enabled {
            record.n = mean_field_correct(
                &record,
                nm.meanfield_coeff_hz_per_atom,
                nm.reference_atoms(),
                self.ramsey_time,
                self.nominal_contrast,
            )?;
        }
        Ok(record)
    }

    /// Runs `shots` shots in parallel; the result is independent of the
    /// thread count.
    pub fn run(&self, shots: usize, base_seed: u64) -> Result<Dataset> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let records = (0..shots as u64)
            .into_par_iter()
            .map(|i| self.sample(i, shot_seed(base_seed, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            schema_version: DATASET_SCHEMA_VERSION,
            base_seed,
            sequence: self.seq.clone(),
            noise: self.noise.clone(),
            nominal_contrast: self.nominal_contrast,
            metadata: Default::default(),
            records,
        })
    }
}

pub fn sample_shot(seq: &PulseSequence, noise: &NoiseModel, seed: u64) -> Result<ShotRecord> {
    ShotSampler::new(seq, noise)?.sample(0, seed)
}

pub fn run_experiment(seq: &PulseSequence, noise: &NoiseModel, shots: usize, base_seed: u64) -> Result<Dataset> {
    ShotSampler::new(seq, noise)?.run(shots, base_seed)
}
