//! Waveform strategies behind one interface, selectable by name.

use std::collections::BTreeMap;

use super::fbmc::FilterBank;
use super::grid::{oqam_to_qam, qam_to_oqam, OqamGrid, QamGrid};
use super::ofdm::Ofdm;
use crate::error::{invalid, Result};
use crate::linalg::{CVec, C64};

/// Demodulated observations per resource slot: `slots[s][m]`. For FBMC a slot
/// is a half-symbol, for OFDM a full symbol.
pub type SlotGrid = Vec<CVec>;

pub trait Modem: Send + Sync {
    fn name(&self) -> &'static str;
    fn num_subcarriers(&self) -> usize;
    /// Resource slots used by `symbols` QAM symbols per subcarrier.
    fn slots_for(&self, symbols: usize) -> usize;
    fn transmit(&self, c: &QamGrid) -> Result<CVec>;
    fn receive(&self, samples: &[C64], slots: usize) -> Result<SlotGrid>;
    /// Maps combined per-slot estimates of one user back to QAM symbols.
    fn to_qam(&self, combined: &SlotGrid) -> Result<QamGrid>;
    /// Sample index at the centre of the receive window of a slot; used as the
    /// reference for the common phase of a frequency offset.
    fn centre_sample(&self, slot: usize) -> f64;
    /// Samples the transmit signal occupies for a given slot count.
    fn signal_len(&self, slots: usize) -> usize;
    /// The underlying filter bank, for schemes that carry OQAM preambles.
    fn filter_bank(&self) -> Option<&FilterBank> {
        None
    }
}

pub struct FbmcModem {
    bank: FilterBank,
}

impl FbmcModem {
    pub fn new(bank: FilterBank) -> Self {
        FbmcModem { bank }
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }
}

impl Modem for FbmcModem {
    fn name(&self) -> &'static str {
        "fbmc"
    }

    fn num_subcarriers(&self) -> usize {
        self.bank.num_subcarriers()
    }

    fn slots_for(&self, symbols: usize) -> usize {
        2 * symbols
    }

    fn transmit(&self, c: &QamGrid) -> Result<CVec> {
        self.bank.synthesize(&qam_to_oqam(c))
    }

    fn receive(&self, samples: &[C64], slots: usize) -> Result<SlotGrid> {
        self.bank.analyze(samples, slots)
    }

    fn to_qam(&self, combined: &SlotGrid) -> Result<QamGrid> {
        let m = self.num_subcarriers();
        let d = OqamGrid::from_fn(m, combined.len(), |mm, k| combined[k][mm].re);
        oqam_to_qam(&d)
    }

    fn centre_sample(&self, slot: usize) -> f64 {
        self.bank.centre_sample(slot)
    }

    fn signal_len(&self, slots: usize) -> usize {
        self.bank.signal_len(slots)
    }

    fn filter_bank(&self) -> Option<&FilterBank> {
        Some(&self.bank)
    }
}

pub struct OfdmModem {
    ofdm: Ofdm,
}

impl OfdmModem {
    pub fn new(ofdm: Ofdm) -> Self {
        OfdmModem { ofdm }
    }
}

impl Modem for OfdmModem {
    fn name(&self) -> &'static str {
        "ofdm"
    }

    fn num_subcarriers(&self) -> usize {
        self.ofdm.num_subcarriers()
    }

    fn slots_for(&self, symbols: usize) -> usize {
        symbols
    }

    fn transmit(&self, c: &QamGrid) -> Result<CVec> {
        self.ofdm.modulate(c)
    }

    fn receive(&self, samples: &[C64], slots: usize) -> Result<SlotGrid> {
        let g = self.ofdm.demodulate(samples, slots)?;
        Ok((0..slots).map(|k| g.column(k).to_vec()).collect())
    }

    fn to_qam(&self, combined: &SlotGrid) -> Result<QamGrid> {
        let m = self.num_subcarriers();
        Ok(QamGrid::from_fn(m, combined.len(), |mm, k| combined[k][mm]))
    }

    fn centre_sample(&self, slot: usize) -> f64 {
        self.ofdm.centre_sample(slot)
    }

    fn signal_len(&self, slots: usize) -> usize {
        slots * self.ofdm.symbol_len()
    }
}

/// Builds a modem for a given subcarrier count.
pub type ModemBuilder = fn(&ModemConfig) -> Result<Box<dyn Modem>>;

#[derive(Debug, Clone)]
pub struct ModemConfig {
    pub num_subcarriers: usize,
    pub overlap: usize,
    pub cp_len: usize,
}

/// Name → modem builder table.
pub struct ModemRegistry {
    builders: BTreeMap<&'static str, ModemBuilder>,
}

impl Default for ModemRegistry {
    fn default() -> Self {
        let mut r = ModemRegistry { builders: BTreeMap::new() };
        r.register("fbmc", |c| {
            let filter = super::prototype::build_iota(c.num_subcarriers, c.overlap)?;
            Ok(Box::new(FbmcModem::new(FilterBank::new(filter))))
        });
        r.register("ofdm", |c| Ok(Box::new(OfdmModem::new(Ofdm::new(c.num_subcarriers, c.cp_len)))));
        r
    }
}

impl ModemRegistry {
    pub fn register(&mut self, name: &'static str, builder: ModemBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, name: &str, config: &ModemConfig) -> Result<Box<dyn Modem>> {
        match self.builders.get(name) {
            Some(b) => b(config),
            None => invalid(format!("unknown waveform '{name}', known: {:?}", self.names())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn registry_builds_both_and_round_trips() {
        let reg = ModemRegistry::default();
        let cfg = ModemConfig { num_subcarriers: 32, overlap: 4, cp_len: 2 };
        let mut s = RngStream::new(9, 0);
        let c = QamGrid::from_fn(32, 8, |_, _| C64::new(s.sign(), s.sign()));
        for name in ["fbmc", "ofdm"] {
            let modem = reg.build(name, &cfg).unwrap();
            assert_eq!(modem.name(), name);
            let slots = modem.slots_for(8);
            let mut x = modem.transmit(&c).unwrap();
            x.resize(modem.signal_len(slots).max(x.len()), C64::new(0.0, 0.0));
            let back = modem.to_qam(&modem.receive(&x, slots).unwrap()).unwrap();
            // Edge symbols are complete in both schemes; FBMC leaves only the
            // truncation residual in the real part.
            for k in 0..8 {
                for m in 0..32 {
                    assert!((back.get(m, k) - c.get(m, k)).norm() < 1e-2, "{name} ({m},{k})");
                }
            }
        }
        assert!(reg.build("wavelet", &cfg).is_err());
    }
}
