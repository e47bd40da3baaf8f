//! Synthetic data, evaluation protocols and metrics.

mod dataset;
mod eval;
mod learn;
mod metrics;
mod protocol;
mod synth;

pub use dataset::*;
pub use eval::*;
pub use learn::*;
pub use metrics::*;
pub use protocol::*;
pub use synth::*;
