use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::NoiseModel;
use crate::error::{Error, Result};
use crate::sequence::PulseSequence;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// One simulated shot. Counts are real numbers because detection noise is
/// continuous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub index: u64,
    pub seed: u64,
    pub theta_rad: f64,
    pub true_atoms: usize,
    /// Atoms found in |2⟩ before detection noise.
    pub true_n2: f64,
    pub n1_detected: f64,
    pub n2_detected: f64,
    pub tech_phase_rad: f64,
    pub meanfield_phase_rad: f64,
    /// (N₂ − N₁)/(N₁ + N₂) of the detected counts.
    pub n_raw: f64,
    /// `n_raw` after the optional mean-field correction.
    pub n: f64,
    /// A detected count was negative and has been clamped to 0.
    pub clamped: bool,
}

impl ShotRecord {
    pub fn detected_total(&self) -> f64 {
        self.n1_detected + self.n2_detected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub base_seed: u64,
    pub sequence: PulseSequence,
    pub noise: NoiseModel,
    /// Noiseless fringe contrast at the mean atom number.
    pub nominal_contrast: f64,
    /// Free-form provenance (config hash, scenario name).
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub records: Vec<ShotRecord>,
}

const CSV_HEADER: [&str; 13] = [
    "index",
    "seed",
    "theta_rad",
    "true_atoms",
    "true_n2_atoms",
    "n1_detected_atoms",
    "n2_detected_atoms",
    "tech_phase_rad",
    "meanfield_phase_rad",
    "n_raw",
    "n",
    "clamped",
    "eta",
];

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.n).collect()
    }

    pub fn raw_n_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.n_raw).collect()
    }

    pub fn mean_detected_atoms(&self) -> f64 {
        self.records.iter().map(ShotRecord::detected_total).sum::<f64>() / self.len().max(1) as f64
    }

    /// Writes `#`-prefixed metadata lines followed by one CSV row per shot.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        writeln!(out, "# schema_version={}", self.schema_version).map_err(io)?;
        writeln!(out, "# base_seed={}", self.base_seed).map_err(io)?;
        writeln!(out, "# nominal_contrast={}", self.nominal_contrast).map_err(io)?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").map_err(io)?;
        }
        let eta = self.sequence.final_eta();
        let mut w = csv::Writer::from_writer(out);
        let csv = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(CSV_HEADER).map_err(csv)?;
        for r in &self.records {
            w.write_record([
                r.index.to_string(),
                r.seed.to_string(),
                r.theta_rad.to_string(),
                r.true_atoms.to_string(),
                r.true_n2.to_string(),
                r.n1_detected.to_string(),
                r.n2_detected.to_string(),
                r.tech_phase_rad.to_string(),
                r.meanfield_phase_rad.to_string(),
                r.n_raw.to_string(),
                r.n.to_string(),
                r.clamped.to_string(),
                eta.to_string(),
            ])
            .map_err(csv)?;
        }
        w.flush().map_err(io)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if d.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported dataset schema {}", d.schema_version)));
        }
        Ok(d)
    }
}
