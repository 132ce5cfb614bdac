use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Mrc,
    Zf,
    Mmse,
}

impl ReceiverKind {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::Mrc => "mrc",
            ReceiverKind::Zf => "zf",
            ReceiverKind::Mmse => "mmse",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "mrc" => Ok(ReceiverKind::Mrc),
            "zf" => Ok(ReceiverKind::Zf),
            "mmse" => Ok(ReceiverKind::Mmse),
            _ => invalid(format!("unknown receiver '{s}' (expected mrc, zf or mmse)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Csi {
    Perfect,
    Imperfect,
}

impl Csi {
    pub fn name(self) -> &'static str {
        match self {
            Csi::Perfect => "perfect",
            Csi::Imperfect => "imperfect",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Csi::Perfect),
            "imperfect" => Ok(Csi::Imperfect),
            _ => invalid(format!("unknown csi mode '{s}' (expected perfect or imperfect)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellModel {
    Single,
    Multi,
}

/// Per-user power schedule 2P_d = E, E/√N or E/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    None,
    InvSqrtN,
    InvN,
}

impl Scaling {
    /// P_d for reference power E (linear) and N antennas.
    pub fn pd(self, e: f64, antennas: usize) -> f64 {
        let n = antennas as f64;
        match self {
            Scaling::None => e / 2.0,
            Scaling::InvSqrtN => e / n.sqrt() / 2.0,
            Scaling::InvN => e / n / 2.0,
        }
    }
}

/// Large-scale gains seen by the base station under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LargeScale {
    Single(Vec<f64>),
    /// `beta[i][u]` = β^u_{n,i} for serving cell n; `beta[n][u]` = 1.
    Multi { beta: Vec<Vec<f64>>, serving: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub antennas: usize,
    pub users: usize,
    pub pilots: usize,
    pub subcarriers: usize,
    /// Half-symbol (OQAM) power; QAM symbols carry 2P_d.
    pub pd: f64,
    pub noise_var: f64,
    pub large_scale: LargeScale,
    /// Coherence interval T_0 in symbols.
    pub coherence: usize,
}

pub const COHERENCE_SYMBOLS: usize = 196;

impl LinkParams {
    pub fn new(
        antennas: usize,
        pilots: usize,
        pd: f64,
        noise_var: f64,
        large_scale: LargeScale,
    ) -> Result<Self> {
        let users = match &large_scale {
            LargeScale::Single(b) => b.len(),
            LargeScale::Multi { beta, serving } => {
                if *serving >= beta.len() {
                    return invalid(format!("serving cell {serving} out of range {}", beta.len()));
                }
                beta[*serving].len()
            }
        };
        let p = LinkParams {
            antennas,
            users,
            pilots,
            subcarriers: 128,
            pd,
            noise_var,
            large_scale,
            coherence: COHERENCE_SYMBOLS,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return invalid("at least one user is required");
        }
        if self.antennas == 0 {
            return invalid("at least one antenna is required");
        }
        if self.pilots < self.users {
            return invalid(format!("need K ≥ U training symbols, got K={} U={}", self.pilots, self.users));
        }
        if !(self.pd > 0.0) {
            return invalid("P_d must be positive");
        }
        if !(self.noise_var >= 0.0) {
            return invalid("σ² must be non-negative");
        }
        if self.coherence <= self.pilots {
            return invalid(format!("T_0={} must exceed K={}", self.coherence, self.pilots));
        }
        match &self.large_scale {
            LargeScale::Single(b) => {
                if b.iter().any(|v| !(*v > 0.0)) {
                    return invalid("large-scale gains must be positive");
                }
            }
            LargeScale::Multi { beta, .. } => {
                if beta.iter().any(|r| r.len() != self.users) {
                    return invalid("β tensor rows must all have U entries");
                }
                if beta.iter().flatten().any(|v| !(*v >= 0.0)) {
                    return invalid("cross gains must be non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn with_pd(&self, pd: f64) -> Self {
        LinkParams { pd, ..self.clone() }
    }

    pub fn with_antennas(&self, antennas: usize) -> Self {
        LinkParams { antennas, ..self.clone() }
    }

    /// P_p = 2·P_d·K.
    pub fn pp(&self) -> f64 {
        2.0 * self.pd * self.pilots as f64
    }

    pub fn cells(&self) -> usize {
        match &self.large_scale {
            LargeScale::Single(_) => 1,
            LargeScale::Multi { beta, .. } => beta.len(),
        }
    }

    pub fn is_multi(&self) -> bool {
        matches!(self.large_scale, LargeScale::Multi { .. })
    }

    pub fn serving(&self) -> usize {
        match &self.large_scale {
            LargeScale::Single(_) => 0,
            LargeScale::Multi { serving, .. } => *serving,
        }
    }

    /// Gains of the home-cell users at their own base station.
    pub fn home_beta(&self) -> Vec<f64> {
        match &self.large_scale {
            LargeScale::Single(b) => b.clone(),
            LargeScale::Multi { beta, serving } => beta[*serving].clone(),
        }
    }

    /// β rows indexed `[i][u]` (a single row in the single-cell case).
    pub fn beta_rows(&self) -> Vec<Vec<f64>> {
        match &self.large_scale {
            LargeScale::Single(b) => vec![b.clone()],
            LargeScale::Multi { beta, .. } => beta.clone(),
        }
    }

    /// γ^u; identically 1 without interfering cells.
    pub fn gamma(&self) -> Vec<f64> {
        match &self.large_scale {
            LargeScale::Single(b) => vec![1.0; b.len()],
            LargeScale::Multi { beta, serving } => crate::estimation::gamma(beta, *serving),
        }
    }

    /// Σ_{i≠n} Σ_j β^j_{n,i}.
    pub fn inter_cell_gain(&self) -> f64 {
        match &self.large_scale {
            LargeScale::Single(_) => 0.0,
            LargeScale::Multi { beta, serving } => beta
                .iter()
                .enumerate()
                .filter(|(i, _)| i != serving)
                .map(|(_, r)| r.iter().sum::<f64>())
                .sum(),
        }
    }

    /// Per-entry variance of the home-cell estimate ĝ^u.
    pub fn est_var(&self, u: usize) -> f64 {
        let (pp, s2) = (self.pp(), self.noise_var);
        match &self.large_scale {
            LargeScale::Single(b) => pp * b[u] * b[u] / (pp * b[u] + s2),
            LargeScale::Multi { .. } => pp / (pp * self.gamma()[u] + s2),
        }
    }

    /// Per-entry variance of the home-cell estimation error e^u.
    pub fn err_var(&self, u: usize) -> f64 {
        let (pp, s2) = (self.pp(), self.noise_var);
        match &self.large_scale {
            LargeScale::Single(b) => b[u] * s2 / (pp * b[u] + s2),
            LargeScale::Multi { .. } => {
                let g = self.gamma()[u];
                (pp * (g - 1.0) + s2) / (pp * g + s2)
            }
        }
    }

    /// Σ_j of the single-cell error variances β^jσ²/(P_pβ^j+σ²).
    pub fn error_sum(&self) -> f64 {
        (0..self.users).map(|u| self.err_var(u)).sum()
    }

    /// μ_n: all estimation-error variances seen at BS n.
    pub fn mu_n(&self) -> Result<f64> {
        let LargeScale::Multi { beta, serving } = &self.large_scale else {
            return Err(Error::InvalidParameter("μ_n needs multi-cell parameters".into()));
        };
        let (pp, s2) = (self.pp(), self.noise_var);
        let gam = self.gamma();
        let mut mu = 0.0;
        for (i, row) in beta.iter().enumerate() {
            if i == *serving {
                continue;
            }
            for (j, b) in row.iter().enumerate() {
                mu += b * (pp * gam[j] - pp * b + s2) / (pp * gam[j] + s2);
            }
        }
        for g in &gam {
            mu += (pp * (g - 1.0) + s2) / (pp * g + s2);
        }
        Ok(mu)
    }

    /// Training overhead factor applied to sum-rates.
    pub fn overhead(&self, csi: Csi) -> f64 {
        match csi {
            Csi::Perfect => 1.0,
            Csi::Imperfect => (self.coherence - self.pilots) as f64 / self.coherence as f64,
        }
    }
}

/// Selects one closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub receiver: ReceiverKind,
    pub csi: Csi,
    pub scaling: Scaling,
    /// Reference power E^u (linear) used by the asymptotes.
    pub reference_power: f64,
}

impl BoundSpec {
    pub fn new(receiver: ReceiverKind, csi: Csi) -> Self {
        BoundSpec { receiver, csi, scaling: Scaling::None, reference_power: 0.0 }
    }

    pub fn scaled(receiver: ReceiverKind, csi: Csi, scaling: Scaling, reference_power: f64) -> Self {
        BoundSpec { receiver, csi, scaling, reference_power }
    }
}
