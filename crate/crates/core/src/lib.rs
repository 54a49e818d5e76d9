//! Signal pipeline and detectors for satellite OFDM jamming detection.

pub mod channel;
pub mod dataset;
pub mod detectors;
pub mod error;
pub mod features;
pub mod jammer;
pub mod seed;
pub mod waveform;

pub use error::{Error, Result};
pub use satjam_ml::Exec;
