//! Monte-Carlo shot generation.
//!
//! Every shot owns a seed derived from the experiment's base seed and the
//! shot index. Each noise channel draws from its own ChaCha8 stream of that
//! seed, so results do not depend on how shots are scheduled.

mod dataset;
mod model;
mod sampler;

pub use dataset::{Dataset, ShotRecord, DATASET_SCHEMA_VERSION};
pub use model::{NoiseModel, ReadoutMode};
pub use sampler::{mean_field_correct, run_experiment, sample_shot, shot_seed, Channel, ShotSampler};
