//! Multipath channels, per-subcarrier frequency responses, large-scale fading
//! and time/frequency-domain propagation.

mod multicell;

use std::f64::consts::PI;

pub use multicell::{gen_multicell, MultiCellConfig, MultiCellScene};

use crate::error::{invalid, Result};
use crate::linalg::{CMat, CVec, C64, ZERO};
use crate::rng::RngStream;

/// Taps g[n][u][l], i.i.d. CN(0, 1/L).
#[derive(Debug, Clone, PartialEq)]
pub struct TapChannel {
    antennas: usize,
    users: usize,
    len: usize,
    taps: Vec<C64>,
}

impl TapChannel {
    pub fn from_taps(antennas: usize, users: usize, len: usize, taps: Vec<C64>) -> Result<Self> {
        if taps.len() != antennas * users * len || len == 0 {
            return invalid("tap tensor size does not match N·U·L");
        }
        Ok(TapChannel { antennas, users, len, taps })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn taps(&self, n: usize, u: usize) -> &[C64] {
        let s = (n * self.users + u) * self.len;
        &self.taps[s..s + self.len]
    }
}

pub fn draw_taps(stream: &mut RngStream, antennas: usize, users: usize, len: usize) -> Result<TapChannel> {
    if len == 0 {
        return invalid("channel length L must be at least 1");
    }
    let var = 1.0 / len as f64;
    let taps = (0..antennas * users * len).map(|_| stream.cn(var)).collect();
    TapChannel::from_taps(antennas, users, len, taps)
}

/// Single-cell large-scale fading D = diag(β).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleSingle(Vec<f64>);

impl LargeScaleSingle {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.iter().any(|b| !(*b > 0.0)) {
            return invalid(format!("large-scale coefficients must be positive: {beta:?}"));
        }
        Ok(LargeScaleSingle(beta))
    }

    pub fn beta(&self) -> &[f64] {
        &self.0
    }
}

fn check_beta(beta: &[f64], users: usize) -> Result<()> {
    if beta.len() != users {
        return invalid(format!("{} large-scale coefficients for {} users", beta.len(), users));
    }
    if let Some(b) = beta.iter().find(|b| !(**b >= 0.0)) {
        return invalid(format!("negative large-scale coefficient {b}"));
    }
    Ok(())
}

/// G_m = H_m · D^{1/2} at one subcarrier, H_m[n][u] = Σ_l g[n][u][l] e^{−j2πml/M}.
pub fn cfr_at(taps: &TapChannel, beta: &[f64], m: usize, num_subcarriers: usize) -> Result<CMat> {
    check_beta(beta, taps.users)?;
    let w: CVec = (0..taps.len)
        .map(|l| C64::from_polar(1.0, -2.0 * PI * ((m * l) % num_subcarriers) as f64 / num_subcarriers as f64))
        .collect();
    let amp: Vec<f64> = beta.iter().map(|b| b.sqrt()).collect();
    Ok(CMat::from_fn(taps.antennas, taps.users, |n, u| {
        let h: C64 = taps.taps(n, u).iter().zip(&w).map(|(g, e)| g * e).sum();
        h * amp[u]
    }))
}

/// Per-subcarrier frequency responses G_m, m ∈ [0, M).
#[derive(Debug, Clone)]
pub struct Cfr {
    mats: Vec<CMat>,
}

impl Cfr {
    pub fn at(&self, m: usize) -> &CMat {
        &self.mats[m]
    }

    pub fn num_subcarriers(&self) -> usize {
        self.mats.len()
    }
}

pub fn cfr(taps: &TapChannel, beta: &[f64], num_subcarriers: usize) -> Result<Cfr> {
    let mats = (0..num_subcarriers)
        .map(|m| cfr_at(taps, beta, m, num_subcarriers))
        .collect::<Result<_>>()?;
    Ok(Cfr { mats })
}

/// y^n[l] = Σ_u √β_u (s^u ⊛ g^{n,u})[l] + η^n[l]; output length is the signal
/// length plus L − 1.
pub fn propagate(
    signals: &[CVec],
    taps: &TapChannel,
    beta: &[f64],
    noise_var: f64,
    stream: &mut RngStream,
) -> Result<Vec<CVec>> {
    if signals.len() != taps.users {
        return invalid(format!("{} user signals for a {}-user channel", signals.len(), taps.users));
    }
    check_beta(beta, taps.users)?;
    let len = signals.first().map_or(0, |s| s.len());
    if signals.iter().any(|s| s.len() != len) {
        return invalid("user signals must have equal length");
    }
    if noise_var < 0.0 {
        return invalid("noise variance must be non-negative");
    }
    let out_len = len + taps.len - 1;
    let mut out = Vec::with_capacity(taps.antennas);
    for n in 0..taps.antennas {
        let mut y = vec![ZERO; out_len];
        for (u, s) in signals.iter().enumerate() {
            if beta[u] == 0.0 {
                continue;
            }
            let amp = beta[u].sqrt();
            for (l, g) in taps.taps(n, u).iter().enumerate() {
                let g = g * amp;
                for (o, x) in y[l..l + len].iter_mut().zip(s) {
                    *o += g * x;
                }
            }
        }
        if noise_var > 0.0 {
            for o in &mut y {
                *o += stream.cn(noise_var);
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// y = G b + η, the flat-per-subcarrier model.
pub fn fd_receive(g: &CMat, b: &[C64], noise_var: f64, stream: &mut RngStream) -> Result<CVec> {
    if g.cols() != b.len() {
        return invalid(format!("G has {} columns but b has {} entries", g.cols(), b.len()));
    }
    let mut y = g.mul_vec(b);
    if noise_var > 0.0 {
        for v in &mut y {
            *v += stream.cn(noise_var);
        }
    }
    Ok(y)
}
