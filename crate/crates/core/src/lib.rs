//! Simulation and analysis toolkit for a spin-squeezed scanning-probe atom
//! interferometer on an atom chip.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin`]: exact collective-spin states in the symmetric (Dicke) basis,
//!   rotations, one-axis twisting, moments, the Wineland squeezing parameter
//!   and spherical Wigner functions.
//! * [`sequence`]: declarative pulse sequences and their noiseless execution.
//! * [`noise`]: Monte-Carlo shot generation with preparation, projection,
//!   detection, technical and mean-field noise.
//! * [`estimation`]: fringe fits, phase-noise and squeezing estimators,
//!   imaging calibration and field-sensitivity conversion.
//! * [`chip`]: Biot–Savart filaments, magnetic trap finding, η-scaled
//!   transport and the microwave ac-Zeeman potential.

pub mod chip;
pub mod constants;
pub mod error;
pub mod estimation;
pub mod noise;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
