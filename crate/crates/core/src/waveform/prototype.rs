//! IOTA prototype filter.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// Sampled symmetric real pulse `p[l]`, `l ∈ [0, overlap·M)`, unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    taps: Vec<f64>,
    num_subcarriers: usize,
    overlap: usize,
}

impl PrototypeFilter {
    /// Wraps arbitrary taps. Length must be `overlap·M`.
    pub fn from_taps(taps: Vec<f64>, num_subcarriers: usize, overlap: usize) -> Result<Self> {
        if taps.len() != overlap * num_subcarriers {
            return invalid(format!(
                "filter has {} taps, expected overlap·M = {}",
                taps.len(),
                overlap * num_subcarriers
            ));
        }
        Ok(PrototypeFilter { taps, num_subcarriers, overlap })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// One tap per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.taps.len() * 24);
        for t in &self.taps {
            s.push_str(&format!("{t:e}\n"));
        }
        s
    }

    pub fn write_taps(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

// Isotropic lattice: T = √2, time spacing τ0 = T/2, frequency spacing ν0 = 1/T.
const T: f64 = SQRT_2;
const TAU0: f64 = T / 2.0;
const NU0: f64 = 1.0 / T;

fn gaussian(t: f64) -> f64 {
    2f64.powf(0.25) * (-PI * t * t).exp()
}

/// Gaussian orthogonalized in time: Σ_k z²(t − kτ0) = 1/τ0.
fn time_orthogonalized(t: f64) -> f64 {
    let r = (t / TAU0).round() as i64;
    let mut s = 0.0;
    for k in r - 12..=r + 12 {
        let g = gaussian(t - k as f64 * TAU0);
        s += g * g;
    }
    gaussian(t) / (TAU0 * s).sqrt()
}

const LMAX: i64 = 10;

/// Fourier coefficients c_l, l ∈ [−LMAX, LMAX]; independent of M, so computed once.
fn iota_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(compute_coefficients)
}

fn compute_coefficients() -> Vec<f64> {
    // Spectrum of z by trapezoid quadrature of an even function.
    let dt = 2e-3;
    let tmax = 6.0;
    let nt = (tmax / dt) as usize;
    let zt: Vec<f64> = (0..=nt).map(|i| time_orthogonalized(i as f64 * dt)).collect();
    let spectrum = |f: f64| -> f64 {
        let mut s = 0.5 * zt[0];
        for (i, z) in zt.iter().enumerate().skip(1) {
            s += z * (2.0 * PI * f * i as f64 * dt).cos();
        }
        2.0 * s * dt
    };

    // 1/D(f) with D² = ν0 Σ_k Z²(f − kν0) is ν0-periodic; its Fourier series
    // coefficients c_l give y(t) = Σ_l c_l z(t − lT).
    let nf = 512;
    let inv_d: Vec<f64> = (0..nf)
        .map(|j| {
            let f = j as f64 * NU0 / nf as f64;
            let mut s = 0.0;
            for k in -8i64..=8 {
                let z = spectrum(f - k as f64 * NU0);
                s += z * z;
            }
            1.0 / (NU0 * s).sqrt()
        })
        .collect();
    (-LMAX..=LMAX)
        .map(|l| {
            inv_d
                .iter()
                .enumerate()
                .map(|(j, v)| v * (2.0 * PI * l as f64 * j as f64 / nf as f64).cos())
                .sum::<f64>()
                / nf as f64
        })
        .collect()
}

/// Continuous-time IOTA function evaluated at the given instants.
fn iota_continuous(instants: &[f64]) -> Vec<f64> {
    let coeffs = iota_coefficients();
    instants
        .iter()
        .map(|&t| {
            (-LMAX..=LMAX)
                .zip(coeffs)
                .map(|(l, c)| c * time_orthogonalized(t - l as f64 * T))
                .sum()
        })
        .collect()
}

/// Discretized IOTA pulse for `m` subcarriers spanning `overlap` symbol periods.
pub fn build_iota(m: usize, overlap: usize) -> Result<PrototypeFilter> {
    if m < 8 || !m.is_power_of_two() {
        return invalid(format!("IOTA needs M ≥ 8 and a power of two, got {m}"));
    }
    if ![3, 4, 6, 8].contains(&overlap) {
        return invalid(format!("unsupported overlap {overlap}, expected one of 3, 4, 6, 8"));
    }
    let len = overlap * m;
    let centre = (len as f64 - 1.0) / 2.0;
    let instants: Vec<f64> = (0..len).map(|l| (l as f64 - centre) * T / m as f64).collect();
    let mut taps = iota_continuous(&instants);
    // Force exact symmetry, then unit energy.
    for l in 0..len / 2 {
        let v = 0.5 * (taps[l] + taps[len - 1 - l]);
        taps[l] = v;
        taps[len - 1 - l] = v;
    }
    let e = taps.iter().map(|x| x * x).sum::<f64>().sqrt();
    for t in &mut taps {
        *t /= e;
    }
    PrototypeFilter::from_taps(taps, m, overlap)
}
