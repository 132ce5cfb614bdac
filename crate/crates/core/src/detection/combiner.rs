use std::collections::BTreeMap;

use crate::analysis::{Csi, ReceiverKind};
use crate::error::{invalid, Result};
use crate::linalg::{gram, CMat, Cholesky};
use crate::waveform::{oqam_to_qam, OqamGrid, QamGrid};

/// A linear receiver: turns a channel (or its estimate) into an N×U combiner.
pub trait Receiver: Send + Sync {
    fn kind(&self) -> ReceiverKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// `loading` is the diagonal regularization of the MMSE receiver (σ²/2P_d
    /// plus estimation-error power); the other receivers ignore it.
    fn combiner(&self, g: &CMat, loading: f64) -> Result<CMat>;
}

pub struct Mrc;
pub struct Zf;
pub struct Mmse;

/// G (G^H G + λI)^{-1}, the push-through form of (GG^H + λI)^{-1} G.
fn regularized_pinv_adj(g: &CMat, lambda: f64) -> Result<CMat> {
    let a = gram(g).add_diag(lambda);
    let chol = Cholesky::new(&a)?;
    // X = A^{-1} G^H (U×N); the combiner is X^H.
    Ok(chol.solve(&g.adjoint()).adjoint())
}

impl Receiver for Mrc {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Mrc
    }

    fn combiner(&self, g: &CMat, _loading: f64) -> Result<CMat> {
        Ok(g.clone())
    }
}

impl Receiver for Zf {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Zf
    }

    fn combiner(&self, g: &CMat, _loading: f64) -> Result<CMat> {
        if g.rows() < g.cols() {
            return invalid(format!("ZF needs N ≥ U, got N={} U={}", g.rows(), g.cols()));
        }
        regularized_pinv_adj(g, 0.0)
    }
}

impl Receiver for Mmse {
    fn kind(&self) -> ReceiverKind {
        ReceiverKind::Mmse
    }

    fn combiner(&self, g: &CMat, loading: f64) -> Result<CMat> {
        if !(loading >= 0.0) {
            return invalid("MMSE loading must be non-negative");
        }
        regularized_pinv_adj(g, loading)
    }
}

/// Name → receiver table.
pub struct ReceiverRegistry {
    entries: BTreeMap<&'static str, Box<dyn Receiver>>,
}

impl Default for ReceiverRegistry {
    fn default() -> Self {
        let mut r = ReceiverRegistry { entries: BTreeMap::new() };
        r.register(Box::new(Mrc));
        r.register(Box::new(Zf));
        r.register(Box::new(Mmse));
        r
    }
}

impl ReceiverRegistry {
    pub fn register(&mut self, receiver: Box<dyn Receiver>) {
        self.entries.insert(receiver.name(), receiver);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Receiver> {
        match self.entries.get(name) {
            Some(r) => Ok(r.as_ref()),
            None => invalid(format!("unknown receiver '{name}', known: {:?}", self.names())),
        }
    }
}

fn receiver(kind: ReceiverKind) -> &'static dyn Receiver {
    match kind {
        ReceiverKind::Mrc => &Mrc,
        ReceiverKind::Zf => &Zf,
        ReceiverKind::Mmse => &Mmse,
    }
}

pub fn build_combiner(kind: ReceiverKind, g: &CMat, loading: f64) -> Result<CMat> {
    receiver(kind).combiner(g, loading)
}

/// A combiner together with how it was obtained.
#[derive(Debug, Clone)]
pub struct Combiner {
    pub kind: ReceiverKind,
    pub csi: Csi,
    pub matrix: CMat,
}

impl Combiner {
    /// MMSE loading is σ²/(2P_d), plus the summed error variance
    /// `error_power` when the channel is an estimate.
    pub fn new(kind: ReceiverKind, csi: Csi, g: &CMat, noise_var: f64, pd: f64, error_power: f64) -> Result<Self> {
        let loading = noise_var / (2.0 * pd) + if csi == Csi::Imperfect { error_power } else { 0.0 };
        Ok(Combiner { kind, csi, matrix: build_combiner(kind, g, loading)? })
    }
}

/// d̂ = Re{A^H y}.
pub fn combine(c: &Combiner, y: &[crate::linalg::C64]) -> Result<Vec<f64>> {
    if y.len() != c.matrix.rows() {
        return invalid(format!("combiner expects {} samples, got {}", c.matrix.rows(), y.len()));
    }
    Ok(c.matrix.adj_mul_vec(y).iter().map(|v| v.re).collect())
}

/// QAM estimates from an OQAM estimate grid.
pub fn reconstruct_qam(d: &OqamGrid) -> Result<QamGrid> {
    oqam_to_qam(d)
}
