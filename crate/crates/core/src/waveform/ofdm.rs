//! CP-OFDM baseline with unitary DFTs.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::grid::QamGrid;
use crate::error::{invalid, Result};
use crate::linalg::{CVec, C64};

#[derive(Clone)]
pub struct Ofdm {
    m: usize,
    cp_len: usize,
    ifft: Arc<dyn Fft<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Ofdm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ofdm").field("m", &self.m).field("cp_len", &self.cp_len).finish()
    }
}

impl Ofdm {
    pub fn new(num_subcarriers: usize, cp_len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Ofdm {
            m: num_subcarriers,
            cp_len,
            ifft: planner.plan_fft_inverse(num_subcarriers),
            fft: planner.plan_fft_forward(num_subcarriers),
        }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.m
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn symbol_len(&self) -> usize {
        self.m + self.cp_len
    }

    /// Centre of the DFT window of symbol `k`.
    pub fn centre_sample(&self, k: usize) -> f64 {
        (k * self.symbol_len() + self.cp_len) as f64 + (self.m as f64 - 1.0) / 2.0
    }

    pub fn modulate(&self, c: &QamGrid) -> Result<CVec> {
        if c.num_subcarriers() != self.m {
            return invalid(format!("grid has {} subcarriers, OFDM {}", c.num_subcarriers(), self.m));
        }
        if self.cp_len > self.m {
            return invalid(format!("cyclic prefix {} longer than the symbol {}", self.cp_len, self.m));
        }
        let scale = 1.0 / (self.m as f64).sqrt();
        let mut out = Vec::with_capacity(c.num_symbols() * self.symbol_len());
        for k in 0..c.num_symbols() {
            let mut buf: CVec = c.column(k).iter().map(|x| x * scale).collect();
            self.ifft.process(&mut buf);
            out.extend_from_slice(&buf[self.m - self.cp_len..]);
            out.extend_from_slice(&buf);
        }
        Ok(out)
    }

    pub fn demodulate(&self, samples: &[C64], num_symbols: usize) -> Result<QamGrid> {
        if samples.len() < num_symbols * self.symbol_len() {
            return invalid(format!(
                "OFDM demodulation needs {} samples, got {}",
                num_symbols * self.symbol_len(),
                samples.len()
            ));
        }
        let scale = 1.0 / (self.m as f64).sqrt();
        let mut out = QamGrid::zeros(self.m, num_symbols);
        for k in 0..num_symbols {
            let start = k * self.symbol_len() + self.cp_len;
            let mut buf: CVec = samples[start..start + self.m].iter().map(|x| x * scale).collect();
            self.fft.process(&mut buf);
            for (m, v) in buf.into_iter().enumerate() {
                out.set(m, k, v);
            }
        }
        Ok(out)
    }
}
