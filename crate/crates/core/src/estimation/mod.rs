//! Statistical analysis of simulated (or measured) shot records.

mod calibration;
mod fringe;
mod sensitivity;
mod statistics;

pub use calibration::{calibrate_alpha, AlphaFit, CalibrationPoint};
pub use fringe::{fit_ramsey, fit_ramsey_datasets, phase_difference, RamseyFit};
pub use sensitivity::{sensitivity_report, Interrogation, Polarization, QuadraticOptions, SensitivityReport};
pub use statistics::{
    fit_noise_growth, phase_noise, squeezing_from_data, squeezing_detection_subtracted, sql_phase, NoiseGrowthFit,
    PhaseNoise, SqueezingEstimate,
};
