use anyhow::{Context, Result};
use scanprobe::estimation::{calibrate_alpha, AlphaFit, CalibrationPoint};
use scanprobe::noise::{Dataset, NoiseModel, ShotSampler};
use scanprobe::sequence::{build_paper_sequence, PaperParams, SequenceKind};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::derive_seed;
use crate::output::{OutputSet, Table};
use crate::plot::{Chart, Series, Style};

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationRun {
    pub repetition: usize,
    pub fit: AlphaFit,
    /// Fit after dividing the detected counts by the fitted α.
    pub rescaled: AlphaFit,
    pub points: Vec<CalibrationPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrateSummary {
    pub injected_alpha: f64,
    pub repetitions: usize,
    pub shots: usize,
    pub det_sigma_n1_atoms: f64,
    pub det_sigma_n2_atoms: f64,
    /// Repetitions whose 95 % interval contains the injected α.
    pub covered: usize,
    pub mean_alpha: f64,
    pub mean_half_width: f64,
    /// Repetitions whose rescaled fit contains 1.
    pub rescaled_covered: usize,
}

#[derive(Clone, Debug)]
pub struct CalibrateOutcome {
    pub summary: CalibrateSummary,
    pub runs: Vec<CalibrationRun>,
}

fn rescaled(d: &Dataset, alpha: f64) -> Dataset {
    let mut d = d.clone();
    for r in &mut d.records {
        r.n1_detected /= alpha;
        r.n2_detected /= alpha;
    }
    d
}

pub fn compute(cfg: &ScenarioConfig) -> Result<CalibrateOutcome> {
    let cc = &cfg.calibrate;
    let (s1, s2) = cfg.noise.detection_sigmas(1.0);
    let samplers = cc
        .atom_grid
        .iter()
        .map(|&atoms| {
            let noise = NoiseModel {
                mean_atoms: atoms,
                imaging_gain: cc.alpha,
                det_sigma_n_far: None,
                tech_sigma_hz: 0.0,
                correction_enabled: false,
                ..cfg.noise.clone()
            };
            let p = PaperParams { atom_count: atoms.round() as usize, ramsey_time_s: 0.0, ..PaperParams::default() };
            let seq = build_paper_sequence(SequenceKind::Fig3Coherent, &p)?;
            let theta = ShotSampler::new(&seq, &noise)?.mid_fringe_theta()?;
            Ok(ShotSampler::new(&seq.with_theta(theta), &noise)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    for r in 0..cc.repetitions {
        let data = samplers
            .iter()
            .enumerate()
            .map(|(i, s)| s.run(cfg.shots, derive_seed(cfg.seed, &[r as u64, i as u64])))
            .collect::<scanprobe::Result<Vec<_>>>()?;
        let points = data.iter().map(CalibrationPoint::from_dataset).collect::<scanprobe::Result<Vec<_>>>()?;
        let fit = calibrate_alpha(&points, s1, s2).with_context(|| format!("repetition {r}"))?;
        let again = data
            .iter()
            .map(|d| CalibrationPoint::from_dataset(&rescaled(d, fit.alpha)))
            .collect::<scanprobe::Result<Vec<_>>>()?;
        let refit = calibrate_alpha(&again, s1, s2).with_context(|| format!("rescaled repetition {r}"))?;
        runs.push(CalibrationRun { repetition: r, fit, rescaled: refit, points });
    }
    let k = runs.len() as f64;
    let summary = CalibrateSummary {
        injected_alpha: cc.alpha,
        repetitions: runs.len(),
        shots: cfg.shots,
        det_sigma_n1_atoms: s1,
        det_sigma_n2_atoms: s2,
        covered: runs.iter().filter(|r| r.fit.contains(cc.alpha)).count(),
        mean_alpha: runs.iter().map(|r| r.fit.alpha).sum::<f64>() / k,
        mean_half_width: runs.iter().map(|r| 0.5 * (r.fit.ci_high - r.fit.ci_low)).sum::<f64>() / k,
        rescaled_covered: runs.iter().filter(|r| r.rescaled.contains(1.0)).count(),
    };
    Ok(CalibrateOutcome { summary, runs })
}

pub fn write(o: &CalibrateOutcome, out: &mut OutputSet) -> Result<()> {
    let mut t = Table::new(&["repetition", "alpha", "std_error", "ci_low", "ci_high", "chi2", "dof", "rescaled_alpha"]);
    for r in &o.runs {
        t.push([
            r.repetition.to_string(),
            r.fit.alpha.to_string(),
            r.fit.std_error.to_string(),
            r.fit.ci_low.to_string(),
            r.fit.ci_high.to_string(),
            r.fit.chi2.to_string(),
            r.fit.dof.to_string(),
            r.rescaled.alpha.to_string(),
        ]);
    }
    out.write_table("fits.csv", &t)?;
    let mut t = Table::new(&["repetition", "mean_atoms", "var_n", "shots", "n2_var_n"]);
    for r in &o.runs {
        for p in &r.points {
            t.push([
                r.repetition.to_string(),
                p.mean_atoms.to_string(),
                p.var_n.to_string(),
                p.shots.to_string(),
                (p.mean_atoms * p.mean_atoms * p.var_n).to_string(),
            ]);
        }
    }
    out.write_table("points.csv", &t)?;
    out.write_json("report.json", &serde_json::json!({ "calibrate": o.summary, "runs": o.runs }))?;

    if let Some(first) = o.runs.first() {
        let det = first.fit.detection_variance;
        let mut chart = Chart::new("Imaging calibration", "⟨N⟩", "⟨N⟩² var(n)");
        chart.add(Series::new(
            "data",
            "#1f77b4",
            Style::Markers,
            first.points.iter().map(|p| (p.mean_atoms, p.mean_atoms * p.mean_atoms * p.var_n)).collect(),
        ));
        let xs: Vec<f64> = first.points.iter().map(|p| p.mean_atoms).collect();
        let (lo, hi) = xs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        chart.add(Series::new(
            &format!("α = {:.3}", first.fit.alpha),
            "black",
            Style::Dashed,
            vec![(lo, first.fit.alpha * lo + det), (hi, first.fit.alpha * hi + det)],
        ));
        out.write_svg("calibration.svg", &chart.to_svg())?;
    }
    Ok(())
}
