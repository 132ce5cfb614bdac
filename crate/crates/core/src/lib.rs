//! Link-level simulator for FBMC-OQAM multi-user massive MIMO uplink:
//! waveform, channels, pilot-based estimation, linear receivers, closed-form
//! rate bounds and a deterministic Monte Carlo harness.

pub mod analysis;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod stats;
pub mod channel;
pub mod waveform;

pub use error::{Error, Result};
