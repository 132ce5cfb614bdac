//! Per-draw SINR closed forms and the exact MMSE ergodic rate.

use super::params::{BoundSpec, Csi, LargeScale, LinkParams, ReceiverKind};
use crate::detection::build_combiner;
use crate::error::{invalid, Error, Result};
use crate::estimation::{lmmse_multicell, lmmse_single, receive_pilots, sylvester, EstimateBundle};
use crate::linalg::{dot, gram, inv_uu, norm_sqr, CMat, C64};
use crate::rng::{rand_cn, RngStream};
use crate::stats::Moments;

/// One channel realization at the base station under study.
#[derive(Debug, Clone)]
pub struct Draw {
    /// True channels G_{n,i}, one N×U matrix per cell (index = cell).
    pub channels: Vec<CMat>,
    pub estimate: Option<EstimateBundle>,
}

impl Draw {
    pub fn home(&self, p: &LinkParams) -> &CMat {
        &self.channels[p.serving()]
    }

    fn ghat(&self) -> Result<&CMat> {
        self.estimate
            .as_ref()
            .map(|e| &e.ghat)
            .ok_or_else(|| Error::InvalidParameter("imperfect-CSI SINR needs channel estimates".into()))
    }
}

/// K×U virtual training matrix √(2P_d)·A with Sylvester signs A.
pub fn analytic_training(p: &LinkParams) -> Result<CMat> {
    if !p.pilots.is_power_of_two() {
        return invalid(format!("K must be a power of two, got {}", p.pilots));
    }
    let a = sylvester(p.pilots);
    let amp = (2.0 * p.pd).sqrt();
    Ok(CMat::from_fn(p.pilots, p.users, |i, u| C64::new(amp * a[i][u], 0.0)))
}

/// G_i = H_i·D_i^{1/2} for every cell, plus LMMSE estimates when `csi` is
/// imperfect.
pub fn draw_channels(p: &LinkParams, csi: Csi, stream: &mut RngStream) -> Result<Draw> {
    let rows = p.beta_rows();
    let mut channels = Vec::with_capacity(rows.len());
    for row in &rows {
        let h = rand_cn(stream, p.antennas * p.users, 1.0)?;
        channels.push(CMat::from_fn(p.antennas, p.users, |a, u| h[a * p.users + u] * row[u].sqrt()));
    }
    let estimate = match csi {
        Csi::Perfect => None,
        Csi::Imperfect => {
            let b = analytic_training(p)?;
            let refs: Vec<&CMat> = channels.iter().collect();
            let y = receive_pilots(&refs, &b, p.noise_var, stream)?;
            Some(match &p.large_scale {
                LargeScale::Single(beta) => lmmse_single(&y, &b, beta, p.noise_var)?,
                LargeScale::Multi { beta, serving } => lmmse_multicell(&y, &b, beta, *serving, p.noise_var)?,
            })
        }
    };
    Ok(Draw { channels, estimate })
}

fn check_draw(p: &LinkParams, draw: &Draw) -> Result<()> {
    if draw.channels.len() != p.cells() {
        return invalid(format!("draw has {} cells, parameters have {}", draw.channels.len(), p.cells()));
    }
    if draw.channels.iter().any(|g| g.rows() != p.antennas || g.cols() != p.users) {
        return invalid("draw channel dimensions disagree with N×U");
    }
    Ok(())
}

fn mmse_from_gram(g: &CMat, c: f64) -> Result<Vec<f64>> {
    let a = gram(g).scale(c).add_diag(1.0);
    (0..g.cols()).map(|u| Ok(1.0 / inv_uu(&a, u)? - 1.0)).collect()
}

/// Per-user Υ of the selected receiver on one draw (powers from `p`).
pub fn sinr_closed_form(spec: &BoundSpec, p: &LinkParams, draw: &Draw) -> Result<Vec<f64>> {
    check_draw(p, draw)?;
    let e2 = 2.0 * p.pd;
    let s2 = p.noise_var;
    let users = p.users;
    match (p.is_multi(), spec.receiver, spec.csi) {
        (false, ReceiverKind::Mrc, Csi::Perfect) => {
            let g = &draw.channels[0];
            let cols: Vec<_> = (0..users).map(|u| g.col(u)).collect();
            Ok((0..users)
                .map(|u| {
                    let n2 = norm_sqr(&cols[u]);
                    let mui: f64 =
                        (0..users).filter(|i| *i != u).map(|i| dot(&cols[u], &cols[i]).norm_sqr()).sum();
                    e2 * n2 * n2 / (e2 * mui + s2 * n2)
                })
                .collect())
        }
        (false, ReceiverKind::Zf, Csi::Perfect) => {
            let gg = gram(&draw.channels[0]);
            (0..users).map(|u| Ok(e2 / (s2 * inv_uu(&gg, u)?))).collect()
        }
        (false, ReceiverKind::Mmse, Csi::Perfect) => mmse_from_gram(&draw.channels[0], e2 / s2),
        (false, ReceiverKind::Mrc, Csi::Imperfect) => {
            let gh = draw.ghat()?;
            let eps = p.error_sum();
            let cols: Vec<_> = (0..users).map(|u| gh.col(u)).collect();
            Ok((0..users)
                .map(|u| {
                    let n2 = norm_sqr(&cols[u]);
                    let mui: f64 =
                        (0..users).filter(|j| *j != u).map(|j| dot(&cols[u], &cols[j]).norm_sqr() / n2).sum();
                    e2 * n2 / (e2 * (mui + eps) + s2)
                })
                .collect())
        }
        (false, ReceiverKind::Zf, Csi::Imperfect) => {
            let gg = gram(draw.ghat()?);
            let den = e2 * p.error_sum() + s2;
            (0..users).map(|u| Ok(e2 / (den * inv_uu(&gg, u)?))).collect()
        }
        (false, ReceiverKind::Mmse, Csi::Imperfect) => {
            let c0 = 1.0 / (p.error_sum() + s2 / e2);
            mmse_from_gram(draw.ghat()?, c0)
        }
        (true, ReceiverKind::Mrc, Csi::Perfect) => {
            let n = p.serving();
            let g = &draw.channels[n];
            Ok((0..users)
                .map(|u| {
                    let gu = g.col(u);
                    let n2 = norm_sqr(&gu);
                    let mut interf = 0.0;
                    for (i, gi) in draw.channels.iter().enumerate() {
                        for j in 0..users {
                            if i == n && j == u {
                                continue;
                            }
                            interf += dot(&gu, &gi.col(j)).norm_sqr();
                        }
                    }
                    e2 * n2 * n2 / (e2 * interf + s2 * n2)
                })
                .collect())
        }
        (true, ReceiverKind::Zf, Csi::Perfect) => {
            let gg = gram(draw.home(p));
            let den = e2 * p.inter_cell_gain() + s2;
            (0..users).map(|u| Ok(e2 / (den * inv_uu(&gg, u)?))).collect()
        }
        (true, ReceiverKind::Mrc, Csi::Imperfect) => {
            let gh = draw.ghat()?;
            (0..users)
                .map(|u| {
                    let n2 = norm_sqr(&gh.col(u));
                    Ok(e2 * n2 * n2 / (2.0 * appendix_d_variance(p, draw, u)?))
                })
                .collect()
        }
        (true, ReceiverKind::Zf, Csi::Imperfect) => {
            let gg = gram(draw.ghat()?);
            let LargeScale::Multi { beta, serving } = &p.large_scale else { unreachable!() };
            let (pp, gam) = (p.pp(), p.gamma());
            let mut cross = 0.0;
            for (i, row) in beta.iter().enumerate() {
                if i != *serving {
                    for j in 0..users {
                        cross += pp * row[j] * row[j] / (pp * gam[j] + s2);
                    }
                }
            }
            let x = p.mu_n()? + cross + s2 / e2;
            (0..users).map(|u| Ok(1.0 / (x * inv_uu(&gg, u)?))).collect()
        }
        (true, ReceiverKind::Mmse, _) => Err(Error::Unsupported("multi-cell MMSE is not modelled".into())),
    }
}

/// Var[v] of the multi-cell MRC output with estimated CSI: intra- and
/// inter-cell estimate coupling, all error variances (μ_n), noise, and the
/// coherent contamination term Σ_{i≠n}(β^u_{n,i})²‖ĝ‖⁴.
pub fn appendix_d_variance(p: &LinkParams, draw: &Draw, u: usize) -> Result<f64> {
    let LargeScale::Multi { beta, serving } = &p.large_scale else {
        return invalid("appendix_d_variance needs multi-cell parameters");
    };
    let gh = draw.ghat()?;
    let pd = p.pd;
    let gu = gh.col(u);
    let n2 = norm_sqr(&gu);
    let mut v = 0.0;
    let mut contamination = 0.0;
    for j in 0..p.users {
        if j == u {
            continue;
        }
        let c = dot(&gu, &gh.col(j)).norm_sqr();
        // ĝ^j_{n,i} = β^j_{n,i} ĝ^j_{n,n}.
        for (i, row) in beta.iter().enumerate() {
            v += pd * if i == *serving { c } else { row[j] * row[j] * c };
        }
    }
    for (i, row) in beta.iter().enumerate() {
        if i != *serving {
            contamination += row[u] * row[u];
        }
    }
    v += pd * (p.mu_n()? + p.noise_var / (2.0 * pd) + contamination * n2) * n2;
    Ok(v)
}

/// SINR of a complex-symbol (CP-OFDM) link with the same combiner, written
/// directly from the combiner output: 2P_d|a^H g_u|² over interference,
/// estimation error and noise.
pub fn ofdm_sinr(spec: &BoundSpec, p: &LinkParams, draw: &Draw) -> Result<Vec<f64>> {
    check_draw(p, draw)?;
    if p.is_multi() {
        return Err(Error::Unsupported("the OFDM reference path is single-cell".into()));
    }
    let e2 = 2.0 * p.pd;
    let (g, eps) = match spec.csi {
        Csi::Perfect => (&draw.channels[0], 0.0),
        Csi::Imperfect => (draw.ghat()?, p.error_sum()),
    };
    let loading = match spec.csi {
        Csi::Perfect => p.noise_var / e2,
        Csi::Imperfect => eps + p.noise_var / e2,
    };
    let a = build_combiner(spec.receiver, g, loading)?;
    let cols: Vec<_> = (0..p.users).map(|u| g.col(u)).collect();
    Ok((0..p.users)
        .map(|u| {
            let au = a.col(u);
            let sig = dot(&au, &cols[u]).norm_sqr();
            let mui: f64 = (0..p.users).filter(|j| *j != u).map(|j| dot(&au, &cols[j]).norm_sqr()).sum();
            e2 * sig / (e2 * mui + (e2 * eps + p.noise_var) * norm_sqr(&au))
        })
        .collect())
}

/// Monte Carlo mean and 95% half-width of a per-user quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub ci95: f64,
}

/// E[log2(1/[(I + cG^H G)^{-1}]_uu)] over fresh single-cell draws.
pub fn mmse_ergodic_rate(csi: Csi, p: &LinkParams, draws: usize, stream: &mut RngStream) -> Result<Vec<RateEstimate>> {
    if draws < 100 {
        return invalid(format!("mmse_ergodic_rate needs at least 100 draws, got {draws}"));
    }
    let spec = BoundSpec::new(ReceiverKind::Mmse, csi);
    let mut acc = vec![Moments::default(); p.users];
    for _ in 0..draws {
        let d = draw_channels(p, csi, stream)?;
        for (m, s) in acc.iter_mut().zip(sinr_closed_form(&spec, p, &d)?) {
            m.push((1.0 + s).log2());
        }
    }
    Ok(acc.iter().map(|m| RateEstimate { mean: m.mean(), ci95: m.ci95() }).collect())
}
