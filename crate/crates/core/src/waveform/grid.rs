//! Time-frequency symbol grids and the OQAM staggering rule.

use crate::error::{invalid, Result};
use crate::linalg::{C64, ZERO};

/// Real OQAM symbols `d_{m,k}`, subcarrier `m ∈ [0, M)`, half-symbol `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OqamGrid {
    m: usize,
    k: usize,
    data: Vec<f64>,
}

impl OqamGrid {
    pub fn zeros(num_subcarriers: usize, num_half_symbols: usize) -> Self {
        OqamGrid { m: num_subcarriers, k: num_half_symbols, data: vec![0.0; num_subcarriers * num_half_symbols] }
    }

    pub fn from_fn(m: usize, k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut g = Self::zeros(m, k);
        for kk in 0..k {
            for mm in 0..m {
                g.set(mm, kk, f(mm, kk));
            }
        }
        g
    }

    pub fn num_subcarriers(&self) -> usize {
        self.m
    }

    pub fn num_half_symbols(&self) -> usize {
        self.k
    }

    pub fn get(&self, m: usize, k: usize) -> f64 {
        self.data[k * self.m + m]
    }

    pub fn set(&mut self, m: usize, k: usize, v: f64) {
        self.data[k * self.m + m] = v;
    }

    /// All subcarriers of one half-symbol.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }

    /// Mean of d² over the grid.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>() / self.data.len().max(1) as f64
    }
}

/// Complex QAM symbols `c_{m,k̄}` at full-symbol spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct QamGrid {
    m: usize,
    k: usize,
    data: Vec<C64>,
}

impl QamGrid {
    pub fn zeros(num_subcarriers: usize, num_symbols: usize) -> Self {
        QamGrid { m: num_subcarriers, k: num_symbols, data: vec![ZERO; num_subcarriers * num_symbols] }
    }

    pub fn from_fn(m: usize, k: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut g = Self::zeros(m, k);
        for kk in 0..k {
            for mm in 0..m {
                g.set(mm, kk, f(mm, kk));
            }
        }
        g
    }

    pub fn num_subcarriers(&self) -> usize {
        self.m
    }

    pub fn num_symbols(&self) -> usize {
        self.k
    }

    pub fn get(&self, m: usize, k: usize) -> C64 {
        self.data[k * self.m + m]
    }

    pub fn set(&mut self, m: usize, k: usize, v: C64) {
        self.data[k * self.m + m] = v;
    }

    pub fn column(&self, k: usize) -> &[C64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }
}

/// Even m: d_{m,2k̄} = Re c, d_{m,2k̄+1} = Im c. Odd m: the two swap.
pub fn qam_to_oqam(c: &QamGrid) -> OqamGrid {
    let mut d = OqamGrid::zeros(c.m, 2 * c.k);
    for k in 0..c.k {
        for m in 0..c.m {
            let v = c.get(m, k);
            let (a, b) = if m % 2 == 0 { (v.re, v.im) } else { (v.im, v.re) };
            d.set(m, 2 * k, a);
            d.set(m, 2 * k + 1, b);
        }
    }
    d
}

/// Inverse of [`qam_to_oqam`].
pub fn oqam_to_qam(d: &OqamGrid) -> Result<QamGrid> {
    if d.k % 2 != 0 {
        return invalid(format!("oqam_to_qam needs an even half-symbol count, got {}", d.k));
    }
    let mut c = QamGrid::zeros(d.m, d.k / 2);
    for k in 0..d.k / 2 {
        for m in 0..d.m {
            let (a, b) = (d.get(m, 2 * k), d.get(m, 2 * k + 1));
            let v = if m % 2 == 0 { C64::new(a, b) } else { C64::new(b, a) };
            c.set(m, k, v);
        }
    }
    Ok(c)
}
