use std::f64::consts::TAU;

use anyhow::{Context, Result};
use scanprobe::estimation::{fit_noise_growth, phase_noise, sql_phase};
use scanprobe::noise::{Dataset, NoiseModel, ShotSampler};
use scanprobe::sequence::{build_paper_sequence, PaperParams, SequenceKind};
use scanprobe::spin::{calibrate_twist, from_db, to_db};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::derive_seed;
use crate::output::{OutputSet, Table};
use crate::plot::{Chart, Series, Style};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    Squeezed,
    Coherent,
}

impl InputState {
    pub fn name(self) -> &'static str {
        match self {
            InputState::Squeezed => "squeezed",
            InputState::Coherent => "coherent",
        }
    }

    fn kind(self) -> SequenceKind {
        match self {
            InputState::Squeezed => SequenceKind::Fig3Squeezed,
            InputState::Coherent => SequenceKind::Fig3Coherent,
        }
    }
}

/// One (state, T_R, repetition) measurement at mid-fringe.
#[derive(Clone, Debug, Serialize)]
pub struct Fig3Point {
    pub state: InputState,
    pub ramsey_time_s: f64,
    pub repetition: usize,
    pub sigma_phi_rad: f64,
    pub std_error_rad: f64,
    pub xi2_db: f64,
    /// The same shots without the per-shot mean-field correction.
    pub sigma_phi_uncorrected_rad: f64,
    pub xi2_uncorrected_db: f64,
}

/// Repetition average at one grid point, with the dashed model.
#[derive(Clone, Debug, Serialize)]
pub struct Fig3Average {
    pub state: InputState,
    pub ramsey_time_s: f64,
    pub sigma_phi_rad: f64,
    pub std_error_rad: f64,
    pub xi2_db: f64,
    pub sigma_phi_uncorrected_rad: f64,
    pub xi2_uncorrected_db: f64,
    pub model_sigma_phi_rad: f64,
    pub sql_rad: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig3Summary {
    pub atom_count: usize,
    pub mu_star_rad: f64,
    pub det_sigma_n: f64,
    pub tech_sigma_hz: f64,
    pub shots: usize,
    pub repetitions: usize,
    pub sql_rad: f64,
    /// Where the fitted squeezed noise growth a + bT² meets the SQL, per
    /// repetition.
    pub crossing_time_s: Vec<Option<f64>>,
    pub crossing_time_uncorrected_s: Vec<Option<f64>>,
    pub mean_crossing_time_s: Option<f64>,
    pub mean_crossing_time_uncorrected_s: Option<f64>,
    /// Largest grid T_R up to which every averaged squeezed point is below
    /// the SQL.
    pub below_sql_until_s: Option<f64>,
    pub below_sql_until_uncorrected_s: Option<f64>,
    pub squeezed_short_xi2_db: f64,
    pub coherent_short_xi2_db: f64,
}

#[derive(Clone, Debug)]
pub struct Fig3Outcome {
    pub summary: Fig3Summary,
    pub points: Vec<Fig3Point>,
    pub averages: Vec<Fig3Average>,
    /// Datasets of the first repetition, keyed by file stem.
    pub datasets: Vec<(String, Dataset)>,
}

fn mid_fringe_sampler(kind: SequenceKind, p: &PaperParams, noise: &NoiseModel) -> Result<ShotSampler> {
    let seq = build_paper_sequence(kind, p)?;
    let theta = ShotSampler::new(&seq, noise)?.mid_fringe_theta()?;
    Ok(ShotSampler::new(&seq.with_theta(theta), noise)?)
}

fn sample_variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

fn mean_crossing(c: &[Option<f64>]) -> Option<f64> {
    let v: Option<Vec<f64>> = c.iter().copied().collect();
    v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

fn below_until(avg: &[&Fig3Average], sql2: f64, uncorrected: bool) -> Option<f64> {
    let mut last = None;
    for a in avg {
        let s = if uncorrected { a.sigma_phi_uncorrected_rad } else { a.sigma_phi_rad };
        if s * s >= sql2 {
            break;
        }
        last = Some(a.ramsey_time_s);
    }
    last
}

pub fn compute(cfg: &ScenarioConfig) -> Result<Fig3Outcome> {
    let fc = &cfg.fig3;
    let noise = cfg.fig3_noise()?;
    let n = cfg.atoms()?;
    let atoms = n as f64;
    let mu = calibrate_twist(n, fc.target_db)?;
    let sql = sql_phase(atoms);
    let reps = fc.repetitions;
    let states = [InputState::Squeezed, InputState::Coherent];

    let mut points = Vec::new();
    let mut datasets = Vec::new();
    for (si, &state) in states.iter().enumerate() {
        for (ti, &t) in fc.ramsey_times_s.iter().enumerate() {
            let p = PaperParams {
                atom_count: n,
                mu_rad: mu,
                squeezing_time_s: fc.squeezing_time_s,
                ramsey_time_s: t,
                alignment: fc.alignment,
                ..PaperParams::default()
            };
            let sampler = mid_fringe_sampler(state.kind(), &p, &noise)
                .with_context(|| format!("{} sequence at T_R = {t} s", state.name()))?;
            let contrast = sampler.nominal_contrast();
            for r in 0..reps {
                let seed = derive_seed(cfg.seed, &[r as u64, si as u64, ti as u64]);
                let mut d = sampler.run(cfg.shots, seed)?;
                let pn = phase_noise(&d.n_values(), contrast)
                    .with_context(|| format!("{} at T_R = {t} s, repetition {r}", state.name()))?;
                let raw = sample_variance(&d.raw_n_values()).sqrt() / contrast;
                points.push(Fig3Point {
                    state,
                    ramsey_time_s: t,
                    repetition: r,
                    sigma_phi_rad: pn.sigma_phi_rad,
                    std_error_rad: pn.std_error_rad,
                    xi2_db: to_db(atoms * pn.sigma_phi_rad.powi(2)),
                    sigma_phi_uncorrected_rad: raw,
                    xi2_uncorrected_db: to_db(atoms * raw * raw),
                });
                if r == 0 {
                    d.metadata.insert("state".into(), state.name().into());
                    d.metadata.insert("ramsey_time_s".into(), t.to_string());
                    datasets.push((format!("{}_{ti:02}", state.name()), d));
                }
            }
        }
    }

    let tech = noise.tech_sigma_hz;
    let mut averages = Vec::new();
    for &state in &states {
        let model_db = match state {
            InputState::Squeezed => fc.model_squeezed_db,
            InputState::Coherent => fc.model_coherent_db,
        };
        for &t in &fc.ramsey_times_s {
            let sel: Vec<&Fig3Point> = points.iter().filter(|p| p.state == state && p.ramsey_time_s == t).collect();
            let k = sel.len() as f64;
            let var = sel.iter().map(|p| p.sigma_phi_rad.powi(2)).sum::<f64>() / k;
            let var_raw = sel.iter().map(|p| p.sigma_phi_uncorrected_rad.powi(2)).sum::<f64>() / k;
            // error of the mean variance, propagated back to σ
            let se_var = sel.iter().map(|p| (2.0 * p.sigma_phi_rad * p.std_error_rad).powi(2)).sum::<f64>().sqrt() / k;
            averages.push(Fig3Average {
                state,
                ramsey_time_s: t,
                sigma_phi_rad: var.sqrt(),
                std_error_rad: se_var / (2.0 * var.sqrt()),
                xi2_db: to_db(atoms * var),
                sigma_phi_uncorrected_rad: var_raw.sqrt(),
                xi2_uncorrected_db: to_db(atoms * var_raw),
                model_sigma_phi_rad: (from_db(model_db) / atoms + (TAU * tech * t).powi(2)).sqrt(),
                sql_rad: sql,
            });
        }
    }

    let crossing = |uncorrected: bool| -> Result<Vec<Option<f64>>> {
        (0..reps)
            .map(|r| {
                let sel: Vec<&Fig3Point> =
                    points.iter().filter(|p| p.state == InputState::Squeezed && p.repetition == r).collect();
                let times: Vec<f64> = sel.iter().map(|p| p.ramsey_time_s).collect();
                let vars: Vec<f64> = sel
                    .iter()
                    .map(|p| if uncorrected { p.sigma_phi_uncorrected_rad } else { p.sigma_phi_rad }.powi(2))
                    .collect();
                let fit = fit_noise_growth(&times, &vars, &vec![cfg.shots; times.len()])?;
                Ok(fit.crossing_time(sql * sql))
            })
            .collect()
    };
    let crossing_time_s = crossing(false)?;
    let crossing_time_uncorrected_s = crossing(true)?;

    let squeezed: Vec<&Fig3Average> = averages.iter().filter(|a| a.state == InputState::Squeezed).collect();
    let short_db = |state: InputState| {
        let sel: Vec<&Fig3Point> =
            points.iter().filter(|p| p.state == state && p.ramsey_time_s <= fc.short_time_s).collect();
        let var = sel.iter().map(|p| p.sigma_phi_rad.powi(2)).sum::<f64>() / sel.len().max(1) as f64;
        to_db(atoms * var)
    };
    let summary = Fig3Summary {
        atom_count: n,
        mu_star_rad: mu,
        det_sigma_n: noise.detection_sigma_n(1.0, atoms),
        tech_sigma_hz: tech,
        shots: cfg.shots,
        repetitions: reps,
        sql_rad: sql,
        mean_crossing_time_s: mean_crossing(&crossing_time_s),
        mean_crossing_time_uncorrected_s: mean_crossing(&crossing_time_uncorrected_s),
        crossing_time_s,
        crossing_time_uncorrected_s,
        below_sql_until_s: below_until(&squeezed, sql * sql, false),
        below_sql_until_uncorrected_s: below_until(&squeezed, sql * sql, true),
        squeezed_short_xi2_db: short_db(InputState::Squeezed),
        coherent_short_xi2_db: short_db(InputState::Coherent),
    };
    Ok(Fig3Outcome { summary, points, averages, datasets })
}

pub fn write(o: &Fig3Outcome, out: &mut OutputSet) -> Result<()> {
    let mut t = Table::new(&[
        "state",
        "ramsey_time_s",
        "repetition",
        "sigma_phi_rad",
        "std_error_rad",
        "xi2_db",
        "sigma_phi_uncorrected_rad",
        "xi2_uncorrected_db",
    ]);
    for p in &o.points {
        t.push([
            p.state.name().to_string(),
            p.ramsey_time_s.to_string(),
            p.repetition.to_string(),
            p.sigma_phi_rad.to_string(),
            p.std_error_rad.to_string(),
            p.xi2_db.to_string(),
            p.sigma_phi_uncorrected_rad.to_string(),
            p.xi2_uncorrected_db.to_string(),
        ]);
    }
    out.write_table("points.csv", &t)?;
    let mut t = Table::new(&[
        "state",
        "ramsey_time_s",
        "sigma_phi_rad",
        "std_error_rad",
        "xi2_db",
        "sigma_phi_uncorrected_rad",
        "xi2_uncorrected_db",
        "model_sigma_phi_rad",
        "sql_rad",
    ]);
    for a in &o.averages {
        t.push([
            a.state.name().to_string(),
            a.ramsey_time_s.to_string(),
            a.sigma_phi_rad.to_string(),
            a.std_error_rad.to_string(),
            a.xi2_db.to_string(),
            a.sigma_phi_uncorrected_rad.to_string(),
            a.xi2_uncorrected_db.to_string(),
            a.model_sigma_phi_rad.to_string(),
            a.sql_rad.to_string(),
        ]);
    }
    out.write_table("sigma_phi_vs_tr.csv", &t)?;
    out.write_json("report.json", &serde_json::json!({ "fig3": o.summary }))?;
    for (name, d) in &o.datasets {
        out.write_json(&format!("datasets/{name}.json"), &serde_json::json!({ "dataset": d }))?;
    }

    let mut chart = Chart::new("Ramsey phase noise", "T_R (ms)", "σφ (mrad)");
    let series = |state: InputState| -> Vec<&Fig3Average> { o.averages.iter().filter(|a| a.state == state).collect() };
    for (state, color) in [(InputState::Squeezed, "#1f77b4"), (InputState::Coherent, "#d62728")] {
        let s = series(state);
        chart.add(
            Series::new(
                state.name(),
                color,
                Style::Markers,
                s.iter().map(|a| (1e3 * a.ramsey_time_s, 1e3 * a.sigma_phi_rad)).collect(),
            )
            .with_errors(s.iter().map(|a| 1e3 * a.std_error_rad).collect()),
        );
        chart.add(Series::new(
            &format!("{} model", state.name()),
            color,
            Style::Dashed,
            s.iter().map(|a| (1e3 * a.ramsey_time_s, 1e3 * a.model_sigma_phi_rad)).collect(),
        ));
    }
    let sq = series(InputState::Squeezed);
    chart.add(Series::new("SQL", "black", Style::Line, sq.iter().map(|a| (1e3 * a.ramsey_time_s, 1e3 * a.sql_rad)).collect()));
    out.write_svg("sigma_phi_vs_tr.svg", &chart.to_svg())
}
