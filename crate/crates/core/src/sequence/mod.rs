mod engine;
mod paper;
mod step;

pub use engine::*;
pub use paper::*;
pub use step::*;
