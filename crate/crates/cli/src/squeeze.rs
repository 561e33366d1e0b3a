use std::f64::consts::{FRAC_PI_2, PI};

use anyhow::{ensure, Result};
use scanprobe::spin::{
    antisqueezed_tilt, calibrate_twist, coherent_state, moments, optimal_twist, squeezing_wineland, to_db, twist,
    twist_squeezing, DickeState, WignerKernel, MAX_WIGNER_ATOMS,
};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::output::{OutputSet, Table};
use crate::plot::{heatmap_svg, Chart, Series, Style};

/// Largest deviation from the target accepted after calibration.
pub const CALIBRATION_TOLERANCE_DB: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeSummary {
    pub atom_count: usize,
    pub target_db: f64,
    pub mu_star_rad: f64,
    pub xi2_at_mu_star: f64,
    /// From the exact Dicke-basis state.
    pub xi2_db_at_mu_star: f64,
    pub xi2_db_closed_form: f64,
    pub mu_optimal_rad: f64,
    pub xi2_db_optimal: f64,
    pub antisqueezed_tilt_deg: f64,
    pub wigner_emitted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub mu_rad: f64,
    pub xi2_db: f64,
    pub xi2_db_closed_form: f64,
    pub antisqueezed_tilt_deg: f64,
}

#[derive(Clone, Debug)]
pub struct WignerRaster {
    pub polar_rad: Vec<f64>,
    pub azimuth_rad: Vec<f64>,
    /// Indexed [polar][azimuth].
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct SqueezeOutcome {
    pub summary: SqueezeSummary,
    pub curve: Vec<CurvePoint>,
    pub wigner: Option<WignerRaster>,
}

/// Coherent state along +x twisted by μ.
pub fn twisted_state(atom_count: usize, mu: f64) -> Result<DickeState> {
    Ok(twist(&coherent_state(atom_count, FRAC_PI_2, 0.0)?, mu))
}

/// Exact Wineland ξ² of the twisted state.
pub fn exact_xi2(atom_count: usize, mu: f64) -> Result<f64> {
    Ok(squeezing_wineland(&moments(&twisted_state(atom_count, mu)?))?.xi2)
}

pub fn compute(cfg: &ScenarioConfig) -> Result<SqueezeOutcome> {
    let sc = &cfg.squeeze;
    let n = sc.atom_count;
    let mu_star = calibrate_twist(n, sc.target_db)?;
    let xi2 = exact_xi2(n, mu_star)?;
    let xi2_db = to_db(xi2);
    ensure!(
        (xi2_db - sc.target_db).abs() <= CALIBRATION_TOLERANCE_DB,
        "calibration did not converge: ξ²(μ*) = {xi2_db:.3} dB for a target of {} dB",
        sc.target_db
    );
    let mu_opt = optimal_twist(n)?;
    let span = sc.curve_span * mu_opt;
    let curve = (0..sc.curve_points)
        .map(|i| {
            let mu = span * i as f64 / (sc.curve_points - 1) as f64;
            Ok(CurvePoint {
                mu_rad: mu,
                xi2_db: to_db(exact_xi2(n, mu)?),
                xi2_db_closed_form: to_db(twist_squeezing(n, mu)),
                antisqueezed_tilt_deg: if mu == 0.0 { 0.0 } else { antisqueezed_tilt(n, mu).to_degrees() },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wigner = if sc.wigner && n <= MAX_WIGNER_ATOMS {
        let state = twisted_state(n, mu_star)?;
        let kernel = WignerKernel::new(n)?;
        let polar: Vec<f64> = (0..sc.wigner_polar_points)
            .map(|i| PI * i as f64 / (sc.wigner_polar_points.max(2) - 1) as f64)
            .collect();
        let azimuth: Vec<f64> = (0..sc.wigner_azimuth_points)
            .map(|j| -PI + 2.0 * PI * j as f64 / (sc.wigner_azimuth_points.max(2) - 1) as f64)
            .collect();
        let values = polar.iter().map(|&th| azimuth.iter().map(|&ph| kernel.evaluate(&state, th, ph)).collect()).collect();
        Some(WignerRaster { polar_rad: polar, azimuth_rad: azimuth, values })
    } else {
        None
    };
    let summary = SqueezeSummary {
        atom_count: n,
        target_db: sc.target_db,
        mu_star_rad: mu_star,
        xi2_at_mu_star: xi2,
        xi2_db_at_mu_star: xi2_db,
        xi2_db_closed_form: to_db(twist_squeezing(n, mu_star)),
        mu_optimal_rad: mu_opt,
        xi2_db_optimal: to_db(twist_squeezing(n, mu_opt)),
        antisqueezed_tilt_deg: if mu_star == 0.0 { 0.0 } else { antisqueezed_tilt(n, mu_star).to_degrees() },
        wigner_emitted: wigner.is_some(),
    };
    Ok(SqueezeOutcome { summary, curve, wigner })
}

pub fn write(o: &SqueezeOutcome, out: &mut OutputSet) -> Result<()> {
    let mut t = Table::new(&["mu_rad", "xi2_db", "xi2_db_closed_form", "antisqueezed_tilt_deg"]);
    for p in &o.curve {
        t.push([p.mu_rad, p.xi2_db, p.xi2_db_closed_form, p.antisqueezed_tilt_deg]);
    }
    out.write_table("xi2_vs_mu.csv", &t)?;
    out.write_json("report.json", &serde_json::json!({ "squeeze": o.summary }))?;
    let mut chart = Chart::new(
        &format!("One-axis twisting, N = {}", o.summary.atom_count),
        "μ (mrad)",
        "ξ² (dB)",
    );
    chart.add(Series::new("exact", "#1f77b4", Style::Line, o.curve.iter().map(|p| (1e3 * p.mu_rad, p.xi2_db)).collect()));
    chart.add(Series::new(
        "μ*",
        "#d62728",
        Style::Markers,
        vec![(1e3 * o.summary.mu_star_rad, o.summary.xi2_db_at_mu_star)],
    ));
    out.write_svg("xi2_vs_mu.svg", &chart.to_svg())?;
    if let Some(w) = &o.wigner {
        let mut t = Table::new(&["polar_rad", "azimuth_rad", "wigner"]);
        for (i, th) in w.polar_rad.iter().enumerate() {
            for (j, ph) in w.azimuth_rad.iter().enumerate() {
                t.push([*th, *ph, w.values[i][j]]);
            }
        }
        out.write_table("wigner.csv", &t)?;
        let svg = heatmap_svg(
            "Wigner function at μ*",
            "azimuth (rad)",
            "polar angle (rad)",
            (-PI, PI),
            (0.0, PI),
            &w.values,
        );
        out.write_svg("wigner.svg", &svg)?;
    }
    Ok(())
}
