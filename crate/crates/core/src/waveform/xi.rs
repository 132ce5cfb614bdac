//! Transmultiplexer response ξ and intrinsic interference.

use super::fbmc::FilterBank;
use super::grid::OqamGrid;
use crate::linalg::{C64, ZERO};

/// ξ^{m̄,k̄}_{m̄+Δm,k̄+Δk} over |Δm|, |Δk| ≤ radius, for each of the four
/// parity classes of the reference position (m̄ mod 2, k̄ mod 2).
#[derive(Debug, Clone)]
pub struct XiTable {
    radius: usize,
    classes: [Vec<C64>; 4],
}

impl XiTable {
    pub fn radius(&self) -> usize {
        self.radius
    }

    fn slot(&self, dm: i64, dk: i64) -> usize {
        let r = self.radius as i64;
        ((dk + r) * (2 * r + 1) + dm + r) as usize
    }

    /// ξ for reference (m̄, k̄) and offset (Δm, Δk). Panics outside the window.
    pub fn get(&self, m_ref: usize, k_ref: usize, dm: i64, dk: i64) -> C64 {
        let r = self.radius as i64;
        assert!(dm.abs() <= r && dk.abs() <= r, "offset outside ξ window");
        self.classes[(m_ref % 2) * 2 + k_ref % 2][self.slot(dm, dk)]
    }

    /// ⟨ξ⟩ = Im ξ.
    pub fn im(&self, m_ref: usize, k_ref: usize, dm: i64, dk: i64) -> f64 {
        self.get(m_ref, k_ref, dm, dk).im
    }

    /// Σ |ξ|² over the window for one parity class.
    pub fn energy(&self, m_ref: usize, k_ref: usize) -> f64 {
        self.classes[(m_ref % 2) * 2 + k_ref % 2].iter().map(|x| x.norm_sqr()).sum()
    }

    /// Largest |Re ξ − δ| over the window and all classes.
    pub fn orthogonality_residual(&self) -> f64 {
        let r = self.radius as i64;
        let mut worst: f64 = 0.0;
        for class in &self.classes {
            for dk in -r..=r {
                for dm in -r..=r {
                    let v = class[self.slot(dm, dk)];
                    let target = if dm == 0 && dk == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((v.re - target).abs());
                }
            }
        }
        worst
    }

    /// Same-instant coupling Im ξ^{m̄,k}_{m,k} between subcarriers of the full
    /// band, with the cyclic neighbours across the band edge. Entry `[m̄][i]`
    /// is the coupling from subcarrier `m̄ + i − radius` (mod M).
    pub fn same_instant_coupling(&self, bank: &FilterBank, k: usize) -> Vec<Vec<f64>> {
        let m = bank.num_subcarriers() as i64;
        let r = self.radius as i64;
        // Reaching across the band edge adds a factor e^{−jπD} = −1 for odd D.
        let d_odd = (bank.filter().len() - 1) % 2 == 1;
        (0..m)
            .map(|mb| {
                (-r..=r)
                    .map(|dm| {
                        let v = self.im(mb as usize, k, dm, 0);
                        let wraps = mb + dm < 0 || mb + dm >= m;
                        if wraps && d_odd && dm != 0 {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// ξ by direct summation over the basis functions.
pub fn xi_direct(bank: &FilterBank, m: usize, k: usize, m_ref: usize, k_ref: usize) -> C64 {
    let (s1, a) = bank.basis(m, k);
    let (s2, b) = bank.basis(m_ref, k_ref);
    let lo = s1.max(s2);
    let hi = (s1 + a.len()).min(s2 + b.len());
    let mut acc = ZERO;
    for l in lo..hi {
        acc += a[l - s1] * b[l - s2].conj();
    }
    acc
}

pub fn xi_table(bank: &FilterBank, radius: usize) -> XiTable {
    assert!(radius >= 1, "ξ window radius must be at least 1");
    let m = bank.num_subcarriers();
    assert!(m > 2 * radius + 2, "too few subcarriers for the ξ window");
    let r = radius as i64;
    let build = |pm: usize, pk: usize| -> Vec<C64> {
        let m_ref = m / 2 + pm;
        let k_ref = 2 * radius + pk;
        let mut v = Vec::with_capacity((2 * radius + 1).pow(2));
        for dk in -r..=r {
            for dm in -r..=r {
                let mm = (m_ref as i64 + dm) as usize;
                let kk = (k_ref as i64 + dk) as usize;
                v.push(xi_direct(bank, mm, kk, m_ref, k_ref));
            }
        }
        v
    };
    XiTable { radius, classes: [build(0, 0), build(0, 1), build(1, 0), build(1, 1)] }
}

/// I = Σ_{(m,k) ≠ (m̄,k̄)} d_{m,k} ⟨ξ⟩ over the table window.
pub fn intrinsic_interference(d: &OqamGrid, xi: &XiTable, m_ref: usize, k_ref: usize) -> f64 {
    let r = xi.radius() as i64;
    assert!(
        m_ref as i64 >= r
            && k_ref as i64 >= r
            && (m_ref as i64 + r) < d.num_subcarriers() as i64
            && (k_ref as i64 + r) < d.num_half_symbols() as i64,
        "position not interior to the grid"
    );
    let mut acc = 0.0;
    for dk in -r..=r {
        for dm in -r..=r {
            if dm == 0 && dk == 0 {
                continue;
            }
            let v = d.get((m_ref as i64 + dm) as usize, (k_ref as i64 + dk) as usize);
            if v != 0.0 {
                acc += v * xi.im(m_ref, k_ref, dm, dk);
            }
        }
    }
    acc
}
