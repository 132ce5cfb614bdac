//! Counter-style random streams: every draw sequence is a pure function of
//! `(root_seed, stream_id)`, so trials can run on any thread in any order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::CVec;

/// Purpose tags keep the streams of different consumers apart even when they
/// share a trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    Pilots = 2,
    Noise = 3,
    Symbols = 4,
    Scene = 5,
    Oracle = 6,
}

/// Packs (purpose, sweep point, trial) into one stream id.
pub fn stream_id(purpose: Purpose, point: usize, trial: usize) -> u64 {
    debug_assert!(point < (1 << 16) && (trial as u64) < (1u64 << 40));
    ((purpose as u64) << 56) | ((point as u64) << 40) | trial as u64
}

#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(stream_id);
        RngStream { root_seed, stream_id, rng }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Standard normal N(0, 1).
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// +1 or -1 with equal probability.
    pub fn sign(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// One CN(0, variance) sample.
    pub fn cn(&mut self, variance: f64) -> Complex64 {
        let s = (variance / 2.0).sqrt();
        Complex64::new(s * self.normal(), s * self.normal())
    }
}

/// `n` i.i.d. circularly symmetric complex Gaussian samples of the given variance.
pub fn rand_cn(stream: &mut RngStream, n: usize, variance: f64) -> Result<CVec> {
    if !(variance > 0.0) {
        return invalid(format!("rand_cn variance must be positive, got {variance}"));
    }
    Ok((0..n).map(|_| stream.cn(variance)).collect())
}
