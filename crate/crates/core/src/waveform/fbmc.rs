//! Polyphase FBMC-OQAM synthesis and analysis.
//!
//! Basis function: χ_{m,k}[l] = p[l − kM/2] · e^{j2πm(l − D/2)/M} · e^{jφ_{m,k}},
//! φ_{m,k} = π/2·(m + k) − π·m·k, D = L_p − 1. Referencing the subcarrier
//! exponential to the pulse centre keeps the real-field orthogonality of an
//! even-length symmetric pulse.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::grid::OqamGrid;
use super::prototype::PrototypeFilter;
use crate::error::{invalid, Result};
use crate::linalg::{C64, CVec, ZERO};

/// j^n for integer n.
pub(crate) fn j_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// e^{jφ_{m,k}}.
pub fn oqam_phase(m: i64, k: i64) -> C64 {
    let sign = if (m * k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    j_pow(m + k) * sign
}

/// Synthesis/analysis filter bank for one prototype filter.
#[derive(Clone)]
pub struct FilterBank {
    filter: PrototypeFilter,
    centring: Vec<C64>,
    ifft: Arc<dyn Fft<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FilterBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilterBank").field("filter", &self.filter).finish()
    }
}

impl FilterBank {
    pub fn new(filter: PrototypeFilter) -> Self {
        let m = filter.num_subcarriers();
        let d = (filter.len() - 1) as f64;
        let centring = (0..m).map(|mm| C64::from_polar(1.0, -PI * mm as f64 * d / m as f64)).collect();
        let mut planner = FftPlanner::new();
        let ifft = planner.plan_fft_inverse(m);
        let fft = planner.plan_fft_forward(m);
        FilterBank { filter, centring, ifft, fft }
    }

    pub fn filter(&self) -> &PrototypeFilter {
        &self.filter
    }

    pub fn num_subcarriers(&self) -> usize {
        self.filter.num_subcarriers()
    }

    /// Number of samples produced for `k` half-symbols.
    pub fn signal_len(&self, num_half_symbols: usize) -> usize {
        if num_half_symbols == 0 {
            return 0;
        }
        (num_half_symbols - 1) * self.num_subcarriers() / 2 + self.filter.len()
    }

    /// Sample index of the centre of the pulse carrying half-symbol `k`.
    pub fn centre_sample(&self, k: usize) -> f64 {
        (k * self.num_subcarriers() / 2) as f64 + (self.filter.len() as f64 - 1.0) / 2.0
    }

    /// Basis function χ_{m,k} restricted to its support; returns (start, samples).
    pub fn basis(&self, m: usize, k: usize) -> (usize, CVec) {
        let mm = self.num_subcarriers();
        let start = k * mm / 2;
        let d = (self.filter.len() - 1) as f64;
        let ph = oqam_phase(m as i64, k as i64);
        let samples = self
            .filter
            .taps()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let l = (start + i) as f64;
                ph * C64::from_polar(*p, 2.0 * PI * m as f64 * (l - d / 2.0) / mm as f64)
            })
            .collect();
        (start, samples)
    }

    /// s[l] = Σ_{m,k} d_{m,k} χ_{m,k}[l].
    pub fn synthesize(&self, d: &OqamGrid) -> Result<CVec> {
        let m = self.num_subcarriers();
        if d.num_subcarriers() != m {
            return invalid(format!("grid has {} subcarriers, filter bank {}", d.num_subcarriers(), m));
        }
        let taps = self.filter.taps();
        let mut out = vec![ZERO; self.signal_len(d.num_half_symbols())];
        let mut buf = vec![ZERO; m];
        for k in 0..d.num_half_symbols() {
            let col = d.column(k);
            if col.iter().all(|x| *x == 0.0) {
                continue;
            }
            // e^{jφ} · (−1)^{mk} from the absolute time index = j^{m+k}.
            for (mm, b) in buf.iter_mut().enumerate() {
                *b = self.centring[mm] * j_pow((mm + k) as i64) * col[mm];
            }
            self.ifft.process(&mut buf);
            let seg = &mut out[k * m / 2..k * m / 2 + taps.len()];
            for (i, (o, p)) in seg.iter_mut().zip(taps).enumerate() {
                *o += buf[i % m] * *p;
            }
        }
        Ok(out)
    }

    /// y_{m̄,k̄} = Σ_l y[l] χ*_{m̄,k̄}[l] for k̄ ∈ [0, num_half_symbols).
    /// Returns the grid as rows of half-symbols: `out[k][m]`.
    pub fn analyze(&self, samples: &[C64], num_half_symbols: usize) -> Result<Vec<CVec>> {
        let m = self.num_subcarriers();
        let need = self.signal_len(num_half_symbols);
        if samples.len() < need {
            return invalid(format!("analysis needs {need} samples, got {}", samples.len()));
        }
        let taps = self.filter.taps();
        let mut out = Vec::with_capacity(num_half_symbols);
        for k in 0..num_half_symbols {
            let mut buf = vec![ZERO; m];
            let seg = &samples[k * m / 2..k * m / 2 + taps.len()];
            for (i, (y, p)) in seg.iter().zip(taps).enumerate() {
                buf[i % m] += y * *p;
            }
            self.fft.process(&mut buf);
            for (mm, b) in buf.iter_mut().enumerate() {
                *b *= (self.centring[mm] * j_pow((mm + k) as i64)).conj();
            }
            out.push(buf);
        }
        Ok(out)
    }
}

/// Direct triple-sum synthesis, kept as an oracle for the polyphase path.
pub fn synthesize_direct(bank: &FilterBank, d: &OqamGrid) -> CVec {
    let mut out = vec![ZERO; bank.signal_len(d.num_half_symbols())];
    for k in 0..d.num_half_symbols() {
        for m in 0..d.num_subcarriers() {
            let v = d.get(m, k);
            if v == 0.0 {
                continue;
            }
            let (start, chi) = bank.basis(m, k);
            for (i, x) in chi.iter().enumerate() {
                out[start + i] += x * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::waveform::prototype::build_iota;

    fn random_grid(m: usize, k: usize, seed: u64) -> OqamGrid {
        let mut s = RngStream::new(seed, 0);
        OqamGrid::from_fn(m, k, |_, _| s.sign())
    }

    #[test]
    fn zero_grid_gives_zero_samples() {
        let bank = FilterBank::new(build_iota(16, 4).unwrap());
        let s = bank.synthesize(&OqamGrid::zeros(16, 5)).unwrap();
        assert_eq!(s.len(), 4 * 8 + 64);
        assert!(s.iter().all(|x| *x == ZERO));
        let y = bank.analyze(&s, 5).unwrap();
        assert!(y.iter().flatten().all(|x| *x == ZERO));
    }

    #[test]
    fn single_symbol_at_origin() {
        let bank = FilterBank::new(build_iota(16, 4).unwrap());
        let mut d = OqamGrid::zeros(16, 1);
        d.set(0, 0, 1.0);
        let s = bank.synthesize(&d).unwrap();
        for (x, p) in s.iter().zip(bank.filter().taps()) {
            assert!((x - C64::new(*p, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn polyphase_matches_direct_sum() {
        for m in [8, 16, 32] {
            let bank = FilterBank::new(build_iota(m, 4).unwrap());
            let d = random_grid(m, 9, m as u64);
            let fast = bank.synthesize(&d).unwrap();
            let slow = synthesize_direct(&bank, &d);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "M={m}: {err}");
        }
    }

    #[test]
    fn analysis_is_matched_filter() {
        let bank = FilterBank::new(build_iota(16, 4).unwrap());
        let mut s = RngStream::new(3, 0);
        let y: CVec = (0..bank.signal_len(6)).map(|_| s.cn(1.0)).collect();
        let fast = bank.analyze(&y, 6).unwrap();
        for k in 0..6 {
            for m in 0..16 {
                let (start, chi) = bank.basis(m, k);
                let direct: C64 = chi.iter().enumerate().map(|(i, c)| y[start + i] * c.conj()).sum();
                assert!((fast[k][m] - direct).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn real_part_recovers_symbols() {
        let bank = FilterBank::new(build_iota(64, 4).unwrap());
        let d = random_grid(64, 24, 11);
        let y = bank.analyze(&bank.synthesize(&d).unwrap(), 24).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..24 {
            for m in 0..64 {
                worst = worst.max((y[k][m].re - d.get(m, k)).abs());
            }
        }
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn short_input_rejected() {
        let bank = FilterBank::new(build_iota(16, 4).unwrap());
        assert!(bank.analyze(&[ZERO; 10], 2).is_err());
    }
}
