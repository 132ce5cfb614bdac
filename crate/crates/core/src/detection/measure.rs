//! Empirical SINR on a fixed channel draw, and symbol error rates in the
//! analytic (flat per-subcarrier) model.

use crate::analysis::{Csi, Draw, LargeScale, LinkParams, ReceiverKind};
use crate::error::{invalid, Error, Result};
use crate::estimation::{draw_multicell_truth, multicell_error_factor};
use crate::linalg::{dot, CMat, C64};
use crate::rng::RngStream;
use crate::stats::wilson;

use super::combiner::Combiner;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sinr {
    Finite(f64),
    Unbounded,
}

impl Sinr {
    pub fn value(self) -> Option<f64> {
        match self {
            Sinr::Finite(v) => Some(v),
            Sinr::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectionStats {
    /// s_u²·P_d, with s_u the gain of the wanted OQAM symbol.
    pub signal: Vec<f64>,
    /// Mean square of everything else in Re{a_u^H y}.
    pub interference_noise: Vec<f64>,
    /// Mean |ṽ|² of the paired QAM-domain residual ṽ = v_{2k} + j v_{2k+1}.
    pub qam_interference_noise: Vec<f64>,
    pub sinr: Vec<Sinr>,
    pub symbols: usize,
}

/// What is held fixed while the symbols and noise are averaged out; chosen so
/// the empirical SINR estimates the same conditional quantity as the
/// corresponding closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// All channels fixed.
    Fixed,
    /// Home channels fixed, interfering-cell channels redrawn from CN(0, β).
    RedrawCross,
    /// Estimates fixed, true channels redrawn from their law given the estimates.
    RedrawErrors,
}

pub fn conditioning_for(kind: ReceiverKind, csi: Csi, multi: bool) -> Conditioning {
    match (csi, multi, kind) {
        (Csi::Imperfect, _, _) => Conditioning::RedrawErrors,
        (Csi::Perfect, true, ReceiverKind::Zf) => Conditioning::RedrawCross,
        (Csi::Perfect, _, _) => Conditioning::Fixed,
    }
}

fn random_cols(n: usize, beta: &[f64], stream: &mut RngStream) -> CMat {
    CMat::from_fn(n, beta.len(), |_, u| stream.cn(1.0) * beta[u].sqrt())
}

/// Monte Carlo over `trials` OQAM symbol vectors (with Gaussian intrinsic
/// interference of variance P_d) and noise on one draw.
pub fn measure_sinr(
    kind: ReceiverKind,
    csi: Csi,
    p: &LinkParams,
    draw: &Draw,
    trials: usize,
    stream: &mut RngStream,
) -> Result<DetectionStats> {
    if trials < 1 {
        return invalid("measure_sinr needs at least one trial");
    }
    let users = p.users;
    let n = p.serving();
    let ghat = match csi {
        Csi::Perfect => draw.channels[n].clone(),
        Csi::Imperfect => draw
            .estimate
            .as_ref()
            .map(|e| e.ghat.clone())
            .ok_or_else(|| Error::InvalidParameter("imperfect CSI needs estimates".into()))?,
    };
    if p.is_multi() && kind == ReceiverKind::Mmse {
        return Err(Error::Unsupported("multi-cell MMSE is not modelled".into()));
    }
    let comb = Combiner::new(kind, csi, &ghat, p.noise_var, p.pd, p.error_sum())?;
    let a = &comb.matrix;
    let gain: Vec<f64> = (0..users).map(|u| dot(&a.col(u), &ghat.col(u)).re).collect();

    let mode = conditioning_for(kind, csi, p.is_multi());
    let factor = match (&p.large_scale, mode) {
        (LargeScale::Multi { beta, serving }, Conditioning::RedrawErrors) => {
            Some(multicell_error_factor(beta, *serving, p.pp(), p.noise_var)?)
        }
        _ => None,
    };
    let rows = p.beta_rows();
    let err_var: Vec<f64> = (0..users).map(|u| p.err_var(u)).collect();
    let sd = p.pd.sqrt();

    let mut acc = vec![0.0; users];
    let mut acc_qam = vec![0.0; users];
    let mut prev = vec![0.0; users];
    for t in 0..trials {
        let truth: Vec<CMat> = match mode {
            Conditioning::Fixed => draw.channels.clone(),
            Conditioning::RedrawCross => rows
                .iter()
                .enumerate()
                .map(|(i, r)| if i == n { draw.channels[n].clone() } else { random_cols(p.antennas, r, stream) })
                .collect(),
            Conditioning::RedrawErrors => match &factor {
                Some(f) => draw_multicell_truth(draw.estimate.as_ref().unwrap(), f, stream),
                None => {
                    let mut g = ghat.clone();
                    for r in 0..p.antennas {
                        for u in 0..users {
                            g[(r, u)] += stream.cn(err_var[u]);
                        }
                    }
                    vec![g]
                }
            },
        };
        let mut y = vec![C64::new(0.0, 0.0); p.antennas];
        let mut home_d = vec![0.0; users];
        for (i, g) in truth.iter().enumerate() {
            for u in 0..users {
                let d = sd * stream.sign();
                let b = C64::new(d, sd * stream.normal());
                if i == n {
                    home_d[u] = d;
                }
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += g[(r, u)] * b;
                }
            }
        }
        if p.noise_var > 0.0 {
            for yr in &mut y {
                *yr += stream.cn(p.noise_var);
            }
        }
        let est = a.adj_mul_vec(&y);
        for u in 0..users {
            let v = est[u].re - gain[u] * home_d[u];
            acc[u] += v * v;
            if t % 2 == 1 {
                acc_qam[u] += prev[u] * prev[u] + v * v;
            }
            prev[u] = v;
        }
    }
    let pairs = (trials / 2).max(1) as f64;
    let interference_noise: Vec<f64> = acc.iter().map(|v| v / trials as f64).collect();
    let signal: Vec<f64> = gain.iter().map(|s| s * s * p.pd).collect();
    let sinr = signal
        .iter()
        .zip(&interference_noise)
        .map(|(s, v)| if *v <= 1e-24 * s { Sinr::Unbounded } else { Sinr::Finite(s / v) })
        .collect();
    Ok(DetectionStats {
        signal,
        interference_noise,
        qam_interference_noise: acc_qam.iter().map(|v| v / pairs).collect(),
        sinr,
        symbols: trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qam4,
}

impl Modulation {
    /// Random symbol with E|c|² = 2P_d.
    pub fn draw(self, pd: f64, stream: &mut RngStream) -> C64 {
        match self {
            Modulation::Bpsk => C64::new((2.0 * pd).sqrt() * stream.sign(), 0.0),
            Modulation::Qam4 => C64::new(pd.sqrt() * stream.sign(), pd.sqrt() * stream.sign()),
        }
    }

    /// Hard decision, as a ±1 pattern comparable with [`Modulation::pattern`].
    pub fn decide(self, c: C64) -> (f64, f64) {
        match self {
            Modulation::Bpsk => (c.re.signum(), 0.0),
            Modulation::Qam4 => (c.re.signum(), c.im.signum()),
        }
    }

    pub fn pattern(self, c: C64) -> (f64, f64) {
        self.decide(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub errors: u64,
    pub symbols: u64,
    pub ser: f64,
    /// 95% Wilson interval.
    pub lo: f64,
    pub hi: f64,
}

impl SerEstimate {
    pub fn from_counts(errors: u64, symbols: u64) -> Self {
        let (lo, hi) = wilson(errors, symbols);
        let ser = if symbols == 0 { 0.0 } else { errors as f64 / symbols as f64 };
        SerEstimate { errors, symbols, ser, lo, hi }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn merge(self, other: SerEstimate) -> Self {
        SerEstimate::from_counts(self.errors + other.errors, self.symbols + other.symbols)
    }
}

/// SER of the flat model y = G b + η with b = d + jI: QAM symbols are split
/// into two OQAM half-symbols (even subcarrier), combined, recombined and
/// sliced.
pub fn measure_ser_analytic(
    modulation: Modulation,
    kind: ReceiverKind,
    g: &CMat,
    pd: f64,
    noise_var: f64,
    symbols: usize,
    stream: &mut RngStream,
) -> Result<SerEstimate> {
    let users = g.cols();
    let comb = Combiner::new(kind, Csi::Perfect, g, noise_var, pd, 0.0)?;
    let sd = pd.sqrt();
    let mut errors = 0u64;
    for _ in 0..symbols {
        let c: Vec<C64> = (0..users).map(|_| modulation.draw(pd, stream)).collect();
        let mut halves = [vec![0.0; users], vec![0.0; users]];
        for (h, part) in halves.iter_mut().enumerate() {
            let mut y = vec![C64::new(0.0, 0.0); g.rows()];
            for u in 0..users {
                let d = if h == 0 { c[u].re } else { c[u].im };
                let b = C64::new(d, sd * stream.normal());
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += g[(r, u)] * b;
                }
            }
            if noise_var > 0.0 {
                for yr in &mut y {
                    *yr += stream.cn(noise_var);
                }
            }
            *part = super::combine(&comb, &y)?;
        }
        for u in 0..users {
            let est = C64::new(halves[0][u], halves[1][u]);
            if modulation.decide(est) != modulation.pattern(c[u]) {
                errors += 1;
            }
        }
    }
    Ok(SerEstimate::from_counts(errors, (symbols * users) as u64))
}
