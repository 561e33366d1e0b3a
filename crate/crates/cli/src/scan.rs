use std::f64::consts::{PI, TAU};

use anyhow::{Context, Result};
use rayon::prelude::*;
use scanprobe::chip::{v_mw, ChipConfig};
use scanprobe::estimation::{fit_ramsey_datasets, phase_difference, squeezing_from_data};
use scanprobe::noise::{NoiseModel, ShotSampler};
use scanprobe::sequence::{build_paper_sequence, PaperParams, SequenceKind};
use scanprobe::spin::{calibrate_twist, to_db};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::derive_seed;
use crate::output::{OutputSet, Table};
use crate::plot::{Chart, Series, Style};

#[derive(Clone, Debug, Serialize)]
pub struct ScanPosition {
    pub eta: f64,
    pub distance_m: f64,
    pub trap_position_m: [f64; 3],
    pub bottom_field_t: f64,
    pub v_mw_hz: f64,
    pub expected_phase_rad: f64,
    /// Fitted φ − φ₀, unwrapped along the scan.
    pub delta_phi_rad: f64,
    pub delta_phi_error_rad: f64,
    pub reference_contrast: f64,
    pub xi2_db: f64,
    pub xi2_error_db: f64,
    pub xi2_uncorrected_db: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub atom_count: usize,
    pub mu_star_rad: f64,
    pub shots: usize,
    pub correction_enabled: bool,
    /// ⟨ξ²⟩ across positions, averaged linearly and quoted in dB.
    pub mean_xi2_db: f64,
    pub mean_xi2_uncorrected_db: f64,
    pub mean_sigma_phi_deg: f64,
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub summary: ScanSummary,
    pub positions: Vec<ScanPosition>,
}

struct Raw {
    eta: f64,
    trap: scanprobe::chip::TrapSolution,
    v: f64,
    wrapped: f64,
    err: f64,
    contrast: f64,
    xi2: f64,
    xi2_err_db: f64,
    xi2_raw: f64,
}

fn sampler(p: &PaperParams, noise: &NoiseModel, theta: f64) -> Result<ShotSampler> {
    let seq = build_paper_sequence(SequenceKind::ScanningProbe, &PaperParams { theta_rad: theta, ..p.clone() })?;
    Ok(ShotSampler::new(&seq, noise)?)
}

fn position(cfg: &ScenarioConfig, chip: &ChipConfig, mu: f64, index: usize, eta: f64) -> Result<Raw> {
    let sc = &cfg.scan;
    let noise = &cfg.noise;
    let n = cfg.atoms()?;
    let trap = chip.find_trap(eta)?;
    let rms = sc.mw_current_rms_a.unwrap_or(chip.mw_current_rms_a);
    let v = v_mw(&chip.geometry_with_mw(eta, rms)?, &trap.position_m)?;
    let base = PaperParams {
        atom_count: n,
        mu_rad: mu,
        squeezing_time_s: sc.squeezing_time_s,
        ramsey_time_s: sc.ramsey_time_s,
        eta,
        transport_time_s: sc.transport_time_s,
        mw_duration_s: sc.mw_duration_s,
        mw_potential_hz: 0.0,
        alignment: sc.alignment,
        theta_rad: 0.0,
    };
    let with_mw = PaperParams { mw_potential_hz: v, ..base.clone() };
    let per_theta = (cfg.shots / sc.thetas).max(1);
    let idx = index as u64;
    let mut fits = Vec::new();
    for (k, p) in [&base, &with_mw].into_iter().enumerate() {
        let data = (0..sc.thetas)
            .map(|j| {
                let theta = TAU * j as f64 / sc.thetas as f64;
                Ok(sampler(p, noise, theta)?.run(per_theta, derive_seed(cfg.seed, &[idx, k as u64, j as u64]))?)
            })
            .collect::<Result<Vec<_>>>()?;
        fits.push(fit_ramsey_datasets(&data)?);
    }
    let (wrapped, err) = phase_difference(&fits[1], &fits[0]);

    let reference = sampler(&base, noise, 0.0)?;
    let mid = sampler(&base, noise, reference.mid_fringe_theta()?)?;
    let d = mid.run(cfg.shots, derive_seed(cfg.seed, &[idx, 2, 0]))?;
    let contrast = mid.nominal_contrast();
    let sq = squeezing_from_data(&d.n_values(), n as f64, contrast)?;
    let raw = squeezing_from_data(&d.raw_n_values(), n as f64, contrast)?;
    Ok(Raw {
        eta,
        trap,
        v,
        wrapped,
        err,
        contrast: fits[0].contrast,
        xi2: sq.xi2,
        xi2_err_db: sq.std_error_db,
        xi2_raw: raw.xi2,
    })
}

pub fn compute(cfg: &ScenarioConfig) -> Result<ScanOutcome> {
    let sc = &cfg.scan;
    let chip = cfg.chip_config()?;
    let n = cfg.atoms()?;
    let mu = calibrate_twist(n, sc.target_db)?;
    let raw = sc
        .etas
        .par_iter()
        .enumerate()
        .map(|(i, &eta)| position(cfg, &chip, mu, i, eta).with_context(|| format!("scan position η = {eta}")))
        .collect::<Result<Vec<_>>>()?;

    let mut positions = Vec::with_capacity(raw.len());
    let mut previous = 0.0;
    for r in &raw {
        // choose the branch closest to the previous position
        let k = ((previous - r.wrapped) / TAU).round();
        let delta = r.wrapped + k * TAU;
        previous = delta;
        positions.push(ScanPosition {
            eta: r.eta,
            distance_m: r.trap.surface_distance_m(),
            trap_position_m: r.trap.position_m,
            bottom_field_t: r.trap.bottom_field_t,
            v_mw_hz: r.v,
            expected_phase_rad: TAU * r.v * sc.mw_duration_s,
            delta_phi_rad: delta,
            delta_phi_error_rad: r.err,
            reference_contrast: r.contrast,
            xi2_db: to_db(r.xi2),
            xi2_error_db: r.xi2_err_db,
            xi2_uncorrected_db: to_db(r.xi2_raw),
        });
    }
    let k = raw.len() as f64;
    let mean = raw.iter().map(|r| r.xi2).sum::<f64>() / k;
    let mean_raw = raw.iter().map(|r| r.xi2_raw).sum::<f64>() / k;
    let summary = ScanSummary {
        atom_count: n,
        mu_star_rad: mu,
        shots: cfg.shots,
        correction_enabled: cfg.noise.correction_enabled,
        mean_xi2_db: to_db(mean),
        mean_xi2_uncorrected_db: to_db(mean_raw),
        mean_sigma_phi_deg: (mean / n as f64).sqrt() * 180.0 / PI,
    };
    Ok(ScanOutcome { summary, positions })
}

pub fn write(o: &ScanOutcome, out: &mut OutputSet) -> Result<()> {
    let mut t = Table::new(&[
        "eta",
        "distance_m",
        "x_m",
        "y_m",
        "z_m",
        "bottom_field_t",
        "v_mw_hz",
        "expected_phase_rad",
        "delta_phi_rad",
        "delta_phi_error_rad",
        "reference_contrast",
        "xi2_db",
        "xi2_error_db",
        "xi2_uncorrected_db",
    ]);
    for p in &o.positions {
        t.push([
            p.eta,
            p.distance_m,
            p.trap_position_m[0],
            p.trap_position_m[1],
            p.trap_position_m[2],
            p.bottom_field_t,
            p.v_mw_hz,
            p.expected_phase_rad,
            p.delta_phi_rad,
            p.delta_phi_error_rad,
            p.reference_contrast,
            p.xi2_db,
            p.xi2_error_db,
            p.xi2_uncorrected_db,
        ]);
    }
    out.write_table("positions.csv", &t)?;
    out.write_json("report.json", &serde_json::json!({ "scan": o.summary }))?;

    let d_um: Vec<f64> = o.positions.iter().map(|p| 1e6 * p.distance_m).collect();
    let mut chart = Chart::new("Microwave phase shift", "atom-surface distance (μm)", "Δφ (rad)");
    chart.add(
        Series::new("fitted", "#1f77b4", Style::Markers, d_um.iter().zip(&o.positions).map(|(d, p)| (*d, p.delta_phi_rad)).collect())
            .with_errors(o.positions.iter().map(|p| p.delta_phi_error_rad).collect()),
    );
    chart.add(Series::new(
        "2π V_mw T_mw",
        "black",
        Style::Dashed,
        d_um.iter().zip(&o.positions).map(|(d, p)| (*d, p.expected_phase_rad)).collect(),
    ));
    out.write_svg("delta_phi_vs_distance.svg", &chart.to_svg())?;

    let mut chart = Chart::new("Interferometer performance", "atom-surface distance (μm)", "ξ² (dB)");
    chart.add(
        Series::new("corrected", "#1f77b4", Style::Markers, d_um.iter().zip(&o.positions).map(|(d, p)| (*d, p.xi2_db)).collect())
            .with_errors(o.positions.iter().map(|p| p.xi2_error_db).collect()),
    );
    chart.add(Series::new(
        "uncorrected",
        "#d62728",
        Style::Markers,
        d_um.iter().zip(&o.positions).map(|(d, p)| (*d, p.xi2_uncorrected_db)).collect(),
    ));
    chart.add(Series::new("SQL", "black", Style::Line, d_um.iter().map(|d| (*d, 0.0)).collect()));
    out.write_svg("xi2_vs_distance.svg", &chart.to_svg())
}
