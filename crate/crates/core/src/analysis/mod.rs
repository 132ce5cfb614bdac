//! Closed-form SINRs, rate lower bounds, power-scaling limits and sum-rates.

mod bounds;
mod params;
mod sinr;

pub use bounds::{asymptote, lb_rate, sum_asymptote, sum_rate, Asymptote};
pub use params::{BoundSpec, CellModel, Csi, LargeScale, LinkParams, ReceiverKind, Scaling, COHERENCE_SYMBOLS};
pub use sinr::{
    analytic_training, appendix_d_variance, draw_channels, mmse_ergodic_rate, ofdm_sinr, sinr_closed_form, Draw,
    RateEstimate,
};
