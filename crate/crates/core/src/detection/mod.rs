//! Linear receivers, OQAM symbol recovery, empirical SINR and SER.

mod combiner;
mod link;
mod measure;

pub use combiner::{
    build_combiner, combine, reconstruct_qam, Combiner, Mmse, Mrc, Receiver, ReceiverRegistry, Zf,
};
pub use link::{run_link, Link, LinkConfig, LinkOutcome, Waveform};
pub use measure::{
    conditioning_for, measure_ser_analytic, measure_sinr, Conditioning, DetectionStats, Modulation, SerEstimate,
    Sinr,
};
