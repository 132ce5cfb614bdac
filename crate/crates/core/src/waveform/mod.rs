//! FBMC-OQAM filter banks, IOTA prototype, OQAM mapping, ξ table, CFO and a
//! CP-OFDM baseline.

pub mod fbmc;
pub mod grid;
pub mod modem;
pub mod ofdm;
pub mod prototype;
pub mod xi;

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::linalg::{CVec, C64};

pub use fbmc::{synthesize_direct, FilterBank};
pub use grid::{oqam_to_qam, qam_to_oqam, OqamGrid, QamGrid};
pub use modem::{FbmcModem, Modem, ModemConfig, ModemRegistry, OfdmModem, SlotGrid};
pub use ofdm::Ofdm;
pub use prototype::{build_iota, PrototypeFilter};
pub use xi::{intrinsic_interference, xi_direct, xi_table, XiTable};

/// s'[l] = s[l]·e^{j2π·ε·l/M}, with ε normalized to the subcarrier spacing.
pub fn apply_cfo(samples: &[C64], epsilon: f64, num_subcarriers: usize) -> Result<CVec> {
    if epsilon.abs() > 0.5 {
        return invalid(format!("normalized CFO must satisfy |ε| ≤ 0.5, got {epsilon}"));
    }
    let w = 2.0 * PI * epsilon / num_subcarriers as f64;
    Ok(samples.iter().enumerate().map(|(l, s)| s * C64::from_polar(1.0, w * l as f64)).collect())
}
