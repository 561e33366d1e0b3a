//! Scenario runners behind the `scanprobe` command-line tool.
//!
//! Each command has a `compute` step that returns plain data and a `write`
//! step that turns it into CSV, JSON and SVG files through an
//! [`output::OutputSet`].

pub mod calibrate;
pub mod config;
pub mod fig3;
pub mod output;
pub mod plot;
pub mod scan;
pub mod sensitivity;
pub mod squeeze;

pub use config::ScenarioConfig;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Base seed of one experiment in a nested grid. Hashed, so the shot-seed
/// sequences of different experiments do not overlap.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |s, &i| splitmix64(s ^ splitmix64(i)))
}
