mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use proptest::prelude::*;
use scanprobe::estimation::*;
use scanprobe::noise::*;
use scanprobe::sequence::*;
use scanprobe::spin::*;
use scanprobe::Error;

fn thetas(k: usize) -> Vec<f64> {
    (0..k).map(|i| i as f64 * TAU / k as f64).collect()
}

fn coherent(n: usize, ramsey_time_s: f64) -> PulseSequence {
    let p = PaperParams { atom_count: n, ramsey_time_s, ..Default::default() };
    build_paper_sequence(SequenceKind::Fig3Coherent, &p).unwrap()
}

fn mid_fringe(seq: &PulseSequence, noise: &NoiseModel) -> PulseSequence {
    seq.with_theta(ShotSampler::new(seq, noise).unwrap().mid_fringe_theta().unwrap())
}

fn theta_scan(seq: &PulseSequence, noise: &NoiseModel, shots: usize, seed: u64) -> Vec<Dataset> {
    thetas(8)
        .iter()
        .enumerate()
        .map(|(i, &th)| run_experiment(&seq.with_theta(th), noise, shots, seed + 1000 * i as u64).unwrap())
        .collect()
}

#[test]
fn noiseless_fringe_is_recovered_exactly() {
    let th = thetas(8);
    let n: Vec<f64> = th.iter().map(|t| 0.98 * (t + 0.3).sin()).collect();
    let f = fit_ramsey(&th, &n, None).unwrap();
    assert!((f.contrast - 0.98).abs() < 1e-10 && (f.phase - 0.3).abs() < 1e-10);
    assert!(f.contrast_error().is_finite() && f.phase_error().is_finite());
}

#[test]
fn degenerate_designs_are_fit_errors() {
    let th = [0.1, 0.1, 0.1, 0.1];
    assert!(fit_ramsey(&th, &[0.0, 0.1, 0.2, 0.3], None).is_err());
    let narrow = [0.0, 0.5, 1.0, 1.5];
    assert!(fit_ramsey(&narrow, &[0.0, 0.1, 0.2, 0.3], None).is_err());
}

#[test]
fn fitted_contrast_matches_measured_value() {
    let mu = calibrate_twist(1400, -4.3).unwrap();
    let p = PaperParams { mu_rad: mu, ramsey_time_s: 5e-3, alignment: Alignment::Auto, ..Default::default() };
    let seq = build_paper_sequence(SequenceKind::Fig3Squeezed, &p).unwrap();
    let ideal = scan_theta(&seq, &[0.0, 1.0, 2.0], 1.0).unwrap().contrast;
    let noise = NoiseModel { contrast_retention: 0.981 / ideal, ..NoiseModel::default() };
    let data = theta_scan(&seq, &noise, 240, 8);
    let fit = fit_ramsey_datasets(&data).unwrap();
    let sigma = fit.contrast_error();
    assert!((fit.contrast - 0.981).abs() < 3.0 * sigma, "{} ± {}", fit.contrast, sigma);
    assert!(fit.contrast <= 1.0 + 3.0 * sigma);
}

#[test]
fn mw_phase_is_recovered_from_fringe_fits() {
    let n = 1400;
    let mu = calibrate_twist(n, -4.3).unwrap();
    let base = PaperParams { atom_count: n, mu_rad: mu, ..Default::default() };
    let with = PaperParams { mw_potential_hz: 700.0, ..base.clone() };
    let noise = NoiseModel::default();
    let f0 = fit_ramsey_datasets(&theta_scan(&build_paper_sequence(SequenceKind::ScanningProbe, &base).unwrap(), &noise, 240, 1)).unwrap();
    let f1 = fit_ramsey_datasets(&theta_scan(&build_paper_sequence(SequenceKind::ScanningProbe, &with).unwrap(), &noise, 240, 2)).unwrap();
    let (dphi, sigma) = phase_difference(&f1, &f0);
    let injected = TAU * 700.0 * 80e-6;
    assert!((dphi - injected).abs() < 3.0 * sigma, "{dphi} vs {injected} ± {sigma}");
}

#[test]
fn coherent_phase_noise_sits_at_the_sql() {
    let noise = NoiseModel::ideal(1400);
    let seq = mid_fringe(&coherent(1400, 1e-3), &noise);
    let d = run_experiment(&seq, &noise, 2000, 3).unwrap();
    let pn = phase_noise(&d.n_values(), d.nominal_contrast).unwrap();
    assert!((pn.sigma_phi_rad - 26.73e-3).abs() < 3.0 * pn.std_error_rad, "{} ± {}", pn.sigma_phi_rad, pn.std_error_rad);
    assert!((sql_phase(1400.0).to_degrees() - 1.531).abs() < 5e-4);
}

#[test]
fn published_phase_noise_maps_to_published_squeezing() {
    // −2.2 dB below the SQL is 1.19°, printed as 1.2°
    let sigma = sql_phase(1400.0).to_degrees() * from_db(-2.2).sqrt();
    assert!((sigma - 1.2).abs() < 0.05, "{sigma}");
    let xi2 = (1.2f64 / sql_phase(1400.0).to_degrees()).powi(2);
    assert!((to_db(xi2) + 2.2).abs() < 0.1, "{}", to_db(xi2));
}

#[test]
fn technical_noise_alone_gives_expected_phase_spread() {
    let noise = NoiseModel { tech_sigma_hz: 0.15, projection_noise: false, ..NoiseModel::ideal(1400) };
    let seq = mid_fringe(&coherent(1400, 20e-3), &noise);
    let d = run_experiment(&seq, &noise, 3000, 4).unwrap();
    let pn = phase_noise(&d.n_values(), d.nominal_contrast).unwrap();
    assert!((pn.sigma_phi_rad - 18.85e-3).abs() < 3.0 * pn.std_error_rad, "{} ± {}", pn.sigma_phi_rad, pn.std_error_rad);
}

#[test]
fn phase_noise_preconditions() {
    assert!(matches!(phase_noise(&vec![0.01; 40], 0.0), Err(Error::InvalidArgument(_))));
    assert!(phase_noise(&vec![0.0; 10], 1.0).is_err());
    assert!(phase_noise(&vec![0.5; 40], 1.0).is_err());
}

#[test]
fn coherent_squeezing_converges_to_unity() {
    let noise = NoiseModel::ideal(1400);
    let seq = mid_fringe(&coherent(1400, 1e-3), &noise);
    let d = run_experiment(&seq, &noise, 10_000, 6).unwrap();
    let est = squeezing_from_data(&d.n_values(), 1400.0, d.nominal_contrast).unwrap();
    assert!(est.xi2_db.abs() < 3.0 * est.std_error_db, "{} ± {}", est.xi2_db, est.std_error_db);
    assert!(!est.detection_subtracted);
}

#[test]
fn detection_subtraction_removes_the_detection_floor() {
    let noise = NoiseModel { det_sigma_n1_atoms: 5.7, det_sigma_n2_atoms: 4.2, ..NoiseModel::ideal(1400) };
    let seq = mid_fringe(&coherent(1400, 1e-3), &noise);
    let d = run_experiment(&seq, &noise, 10_000, 9).unwrap();
    let raw = squeezing_from_data(&d.n_values(), 1400.0, d.nominal_contrast).unwrap();
    let sub = squeezing_detection_subtracted(&d.n_values(), 1400.0, d.nominal_contrast, noise.detection_sigma_n(1.0, 1400.0)).unwrap();
    assert!(sub.detection_subtracted);
    assert!((raw.xi2_db - 10.0 * (1.0 + 1400.0 * (7.08f64 / 1400.0).powi(2)).log10()).abs() < 3.0 * raw.std_error_db);
    assert!(sub.xi2_db.abs() < 3.0 * sub.std_error_db, "{}", sub.xi2_db);
}

fn calibration_points(alpha: f64, seed: u64) -> Vec<CalibrationPoint> {
    (0..7)
        .map(|i| {
            let n = 400 + 200 * i;
            let noise = NoiseModel {
                mean_atoms: n as f64,
                prep_sigma_atoms: 40.0,
                det_sigma_n1_atoms: 5.7,
                det_sigma_n2_atoms: 4.2,
                imaging_gain: alpha,
                ..NoiseModel::ideal(n)
            };
            let seq = mid_fringe(&coherent(n, 1e-3), &noise);
            CalibrationPoint::from_dataset(&run_experiment(&seq, &noise, 240, seed * 100 + i as u64).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn injected_alpha_is_recovered_at_nominal_coverage() {
    // a 95 % interval misses about one seed in twenty; P(< 17 of 20) ≈ 1.6 %
    for &alpha in &[0.82, 1.0] {
        let covered = (0..20).filter(|&s| calibrate_alpha(&calibration_points(alpha, 40 + s), 5.7, 4.2).unwrap().contains(alpha)).count();
        assert!(covered >= 17, "α = {alpha}: {covered}/20");
    }
}

#[test]
fn rescaled_counts_calibrate_to_unity() {
    let alpha = 0.82;
    let pts = calibration_points(alpha, 3);
    let first = calibrate_alpha(&pts, 5.7, 4.2).unwrap();
    let scaled: Vec<CalibrationPoint> =
        pts.iter().map(|p| CalibrationPoint { mean_atoms: p.mean_atoms / first.alpha, ..p.clone() }).collect();
    let again = calibrate_alpha(&scaled, 5.7 / first.alpha, 4.2 / first.alpha).unwrap();
    assert!(again.contains(1.0), "{again:?}");
    assert!((again.alpha - 1.0).abs() < 1e-9);
}

#[test]
fn alpha_estimator_is_unbiased() {
    for &alpha in &[0.7, 0.82, 1.0] {
        let fits: Vec<f64> = (0..20).map(|s| calibrate_alpha(&calibration_points(alpha, 10 + s), 5.7, 4.2).unwrap().alpha).collect();
        let (m, v) = mean_var(&fits);
        let se = (v / fits.len() as f64).sqrt();
        assert!((m - alpha).abs() < 3.0 * se, "α = {alpha}: {m} ± {se}");
    }
}

#[test]
fn sensitivity_chain_reproduces_published_numbers() {
    // SQL phase over T_R = 20 ms
    let r = sensitivity_report(sql_phase(1400.0), 0.02, 11.0, Interrogation::Free, None).unwrap();
    assert!((r.delta_nu_hz - 0.21).abs() < 0.02 * 0.21, "{}", r.delta_nu_hz);
    let r = sensitivity_report(TAU * 0.21 * 0.02, 0.02, 11.0, Interrogation::Free, None).unwrap();
    let db = 0.21 / 1.399625e10;
    assert!((r.delta_b_nearres_t - db).abs() < 1e-20);
    assert!((r.delta_b_nearres_t - 15e-12).abs() < 0.02 * 15e-12);
    assert!((r.per_root_hz_t - 49.7e-12).abs() < 0.02 * 49.7e-12);
    let q = QuadraticOptions { polarization: Polarization::Pi, operating_field_t: None };
    assert_eq!(
        sensitivity_report(0.02, 0.02, 11.0, Interrogation::Free, Some(q)),
        Err(Error::MissingParameter("operating_field_t"))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fit_is_exact_on_noiseless_fringes(c in 1e-3f64..=1.0, phi in -PI..PI, offset in -0.2f64..0.2, k in 4usize..20, start in -PI..PI) {
        let th: Vec<f64> = (0..k).map(|i| start + i as f64 * TAU / k as f64).collect();
        let n: Vec<f64> = th.iter().map(|t| c * (t + phi).sin() + offset).collect();
        let f = fit_ramsey(&th, &n, None).unwrap();
        prop_assert!((f.contrast - c).abs() < 1e-10);
        let dphi = (f.phase - phi).sin().atan2((f.phase - phi).cos());
        prop_assert!(dphi.abs() < 1e-10 / c.min(1.0) * 10.0);
        prop_assert!((f.offset - offset).abs() < 1e-10);
        prop_assert!(f.phase > -PI && f.phase <= PI);
    }

    #[test]
    fn sensitivity_scales_dimensionally(sigma in 1e-4f64..1.0, t in 1e-5f64..1.0, cycle in 0.1f64..100.0) {
        let a = sensitivity_report(sigma, t, cycle, Interrogation::Free, None).unwrap();
        let b = sensitivity_report(sigma, 2.0 * t, cycle, Interrogation::Free, None).unwrap();
        let c = sensitivity_report(sigma, t, 4.0 * cycle, Interrogation::Free, None).unwrap();
        prop_assert!((b.delta_nu_hz - 0.5 * a.delta_nu_hz).abs() < 1e-12 * a.delta_nu_hz);
        prop_assert!((c.per_root_hz_t - 2.0 * a.per_root_hz_t).abs() < 1e-12 * a.per_root_hz_t);
        prop_assert!((a.per_root_hz_t - a.delta_b_nearres_t * cycle.sqrt()).abs() < 1e-12 * a.per_root_hz_t);
    }
}
