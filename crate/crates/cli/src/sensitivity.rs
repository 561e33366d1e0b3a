use std::f64::consts::TAU;

use anyhow::{bail, Context, Result};
use scanprobe::estimation::{phase_noise, sensitivity_report, sql_phase, Interrogation, QuadraticOptions, SensitivityReport};
use scanprobe::noise::Dataset;
use scanprobe::sequence::SequenceStep;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::output::{OutputSet, Table};

#[derive(Clone, Debug, Serialize)]
pub struct SensitivityOutcome {
    /// Where σφ came from.
    pub source: String,
    pub report: SensitivityReport,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DatasetFile {
    Wrapped { dataset: Dataset },
    Bare(Dataset),
}

/// Reads a dataset written by this tool or a bare dataset record.
pub fn load_dataset(path: &std::path::Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: DatasetFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(match file {
        DatasetFile::Wrapped { dataset } | DatasetFile::Bare(dataset) => dataset,
    })
}

fn pulse_time(d: &Dataset) -> f64 {
    d.sequence
        .steps
        .iter()
        .map(|s| match s {
            SequenceStep::MwPulse { duration_s, .. } => *duration_s,
            _ => 0.0,
        })
        .sum()
}

pub fn compute(cfg: &ScenarioConfig) -> Result<SensitivityOutcome> {
    let sc = &cfg.sensitivity;
    let chosen = [sc.sigma_phi_rad.is_some(), sc.delta_nu_hz.is_some(), sc.sql_atoms.is_some(), sc.dataset.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if chosen > 1 {
        bail!("set at most one of sensitivity.sigma_phi_rad, delta_nu_hz, sql_atoms or dataset (found {chosen})");
    }
    let fixed_time = || sc.interrogation_time_s.context("sensitivity.interrogation_time_s is required");
    let (sigma, time, source) = if let Some(s) = sc.sigma_phi_rad {
        (s, fixed_time()?, format!("sigma_phi_rad = {s}"))
    } else if let Some(nu) = sc.delta_nu_hz {
        let t = fixed_time()?;
        (TAU * nu * t, t, format!("delta_nu_hz = {nu}"))
    } else if let Some(path) = &sc.dataset {
        let d = load_dataset(path)?;
        let pn = phase_noise(&d.n_values(), d.nominal_contrast)?;
        let t = match sc.interrogation {
            Interrogation::Free => d.sequence.ramsey_time(),
            Interrogation::Pulse => pulse_time(&d),
        };
        (pn.sigma_phi_rad, t, format!("dataset {}", path.display()))
    } else {
        let n = sc.sql_atoms.unwrap_or(cfg.noise.mean_atoms);
        (sql_phase(n), fixed_time()?, format!("standard quantum limit for {n} atoms"))
    };
    let quadratic = sc.polarization.map(|polarization| QuadraticOptions { polarization, operating_field_t: sc.operating_field_t });
    let report = sensitivity_report(sigma, time, sc.cycle_time_s, sc.interrogation, quadratic)?;
    Ok(SensitivityOutcome { source, report })
}

pub fn write(o: &SensitivityOutcome, out: &mut OutputSet) -> Result<()> {
    let r = &o.report;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.push(["sigma_phi", &r.sigma_phi_rad.to_string(), "rad"]);
    t.push(["interrogation_time", &r.interrogation_time_s.to_string(), "s"]);
    t.push(["delta_nu", &r.delta_nu_hz.to_string(), "Hz"]);
    t.push(["delta_b_nearres", &r.delta_b_nearres_t.to_string(), "T"]);
    if let Some(q) = r.delta_b_quadratic_t {
        t.push(["delta_b_quadratic", &q.to_string(), "T"]);
    }
    t.push(["per_root_hz", &r.per_root_hz_t.to_string(), "T/sqrt(Hz)"]);
    t.push(["cycle_time", &r.cycle_time_s.to_string(), "s"]);
    out.write_table("sensitivity.csv", &t)?;
    out.write_json("report.json", &serde_json::json!({ "sensitivity": o }))
}
