//! Jensen lower bounds, power-scaling limits and sum-rate aggregation.

use serde::{Deserialize, Serialize};

use super::params::{BoundSpec, Csi, LargeScale, LinkParams, ReceiverKind, Scaling};
use crate::error::{invalid, Error, Result};

fn need_dof(spec: &BoundSpec, p: &LinkParams) -> Result<()> {
    match spec.receiver {
        ReceiverKind::Mrc if p.antennas < 2 => {
            invalid(format!("MRC bound needs N ≥ 2 (E[1/‖g‖²] requires N−1 > 0), got N={}", p.antennas))
        }
        ReceiverKind::Zf if p.antennas <= p.users => invalid(format!(
            "ZF bound needs N > U (E[(G^H G)^-1] requires N−U > 0), got N={} U={}",
            p.antennas, p.users
        )),
        _ => Ok(()),
    }
}

/// Closed-form lower bound on the ergodic rate of user `u` (bits/s/Hz).
pub fn lb_rate(spec: &BoundSpec, p: &LinkParams, u: usize) -> Result<f64> {
    if u >= p.users {
        return invalid(format!("user {u} out of range {}", p.users));
    }
    if spec.receiver == ReceiverKind::Mmse {
        return Err(Error::Unsupported("MMSE lower bound is not evaluated; use the exact ergodic rate".into()));
    }
    need_dof(spec, p)?;
    let n = p.antennas as f64;
    let nu = p.users as f64;
    let s2 = p.noise_var;
    let e2 = 2.0 * p.pd;
    let pp = p.pp();
    let snr = match &p.large_scale {
        LargeScale::Single(beta) => {
            let bu = beta[u];
            match (spec.receiver, spec.csi) {
                (ReceiverKind::Mrc, Csi::Perfect) => {
                    let others: f64 = beta.iter().sum::<f64>() - bu;
                    e2 * (n - 1.0) * bu / (e2 * others + s2)
                }
                (ReceiverKind::Zf, Csi::Perfect) => e2 * bu * (n - nu) / s2,
                (ReceiverKind::Mrc, Csi::Imperfect) => {
                    let others: f64 = beta.iter().sum::<f64>() - bu;
                    pp * (n - 1.0) * bu * bu / ((pp * bu + s2) * (others + s2 / e2) + bu * s2)
                }
                (ReceiverKind::Zf, Csi::Imperfect) => {
                    pp * (n - nu) * bu * bu / ((pp * bu + s2) * (p.error_sum() + s2 / e2))
                }
                (ReceiverKind::Mmse, _) => unreachable!(),
            }
        }
        LargeScale::Multi { beta, serving } => {
            let inter = p.inter_cell_gain();
            let home = &beta[*serving];
            match (spec.receiver, spec.csi) {
                (ReceiverKind::Mrc, Csi::Perfect) => {
                    let intra: f64 = home.iter().sum::<f64>() - home[u];
                    e2 * (n - 1.0) * home[u] / (e2 * (inter + intra) + s2)
                }
                (ReceiverKind::Zf, Csi::Perfect) => e2 * (n - nu) * home[u] / (e2 * inter + s2),
                (ReceiverKind::Mrc, Csi::Imperfect) => {
                    let gam = p.gamma();
                    let contamination: f64 = beta
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i != serving)
                        .map(|(_, r)| r[u] * r[u])
                        .sum();
                    let den = (pp * gam[u] + s2) * (e2 * nu + e2 * inter + s2)
                        + e2 * pp * ((n - 2.0) * contamination - 1.0);
                    e2 * pp * (n - 1.0) / den
                }
                (ReceiverKind::Zf, Csi::Imperfect) => {
                    let gam = p.gamma();
                    let others: f64 =
                        (0..p.users).filter(|j| *j != u).map(|j| e2 * pp / (pp * gam[j] + s2)).sum();
                    let den = (pp * gam[u] + s2) * (e2 * nu + e2 * inter - others + s2) - e2 * pp;
                    e2 * pp * (n - nu) / den
                }
                (ReceiverKind::Mmse, _) => unreachable!(),
            }
        }
    };
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::Numeric(format!("lower bound SINR is {snr} for user {u}")));
    }
    Ok((1.0 + snr).log2())
}

/// Large-N limit of a per-user rate under a power-scaling schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Asymptote {
    Finite(f64),
    Unbounded,
}

pub fn asymptote(spec: &BoundSpec, p: &LinkParams, u: usize) -> Result<Asymptote> {
    if spec.scaling == Scaling::None {
        return invalid("asymptote requires a power-scaling schedule");
    }
    if spec.receiver == ReceiverKind::Mmse {
        return Err(Error::Unsupported("no stated MMSE power-scaling limit".into()));
    }
    if !(spec.reference_power > 0.0) {
        return invalid("reference power E must be positive");
    }
    let e = spec.reference_power;
    let s2 = p.noise_var;
    let beta = p.home_beta()[u];
    match (spec.csi, spec.scaling, p.is_multi()) {
        (Csi::Perfect, Scaling::InvN, _) => Ok(Asymptote::Finite((1.0 + e * beta / s2).log2())),
        (Csi::Perfect, Scaling::InvSqrtN, _) => Ok(Asymptote::Unbounded),
        (Csi::Imperfect, Scaling::InvN, _) => Ok(Asymptote::Finite(0.0)),
        (Csi::Imperfect, Scaling::InvSqrtN, false) => {
            let k = p.pilots as f64;
            Ok(Asymptote::Finite((1.0 + k * (e * beta).powi(2) / (s2 * s2)).log2()))
        }
        (Csi::Imperfect, Scaling::InvSqrtN, true) => {
            Err(Error::Unsupported("no stated multi-cell imperfect-CSI limit under E/√N".into()))
        }
        (_, Scaling::None, _) => unreachable!(),
    }
}

/// Σ_u R_u, times (T_0−K)/T_0 for estimated CSI.
pub fn sum_rate(rates: &[f64], csi: Csi, p: &LinkParams) -> Result<f64> {
    if rates.iter().any(|r| !r.is_finite()) {
        return invalid("sum_rate needs finite per-user rates");
    }
    Ok(p.overhead(csi) * rates.iter().sum::<f64>())
}

/// Sum of per-user asymptotes with the same overhead as [`sum_rate`].
pub fn sum_asymptote(spec: &BoundSpec, p: &LinkParams) -> Result<Asymptote> {
    let mut acc = 0.0;
    for u in 0..p.users {
        match asymptote(spec, p, u)? {
            Asymptote::Unbounded => return Ok(Asymptote::Unbounded),
            Asymptote::Finite(v) => acc += v,
        }
    }
    Ok(Asymptote::Finite(p.overhead(spec.csi) * acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(n: usize, beta: Vec<f64>, pd: f64) -> LinkParams {
        let k = beta.len();
        LinkParams::new(n, k, pd, 1.0, LargeScale::Single(beta)).unwrap()
    }

    #[test]
    fn mrc_single_user_is_one_bit() {
        let p = single(2, vec![1.0], 0.5);
        let r = lb_rate(&BoundSpec::new(ReceiverKind::Mrc, Csi::Perfect), &p, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zf_perfect_hand_value() {
        let p = single(128, vec![1.0; 8], 5.0);
        let r = lb_rate(&BoundSpec::new(ReceiverKind::Zf, Csi::Perfect), &p, 3).unwrap();
        assert!((r - 1201f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn insufficient_antennas() {
        let p = single(1, vec![1.0], 0.5);
        let e = lb_rate(&BoundSpec::new(ReceiverKind::Mrc, Csi::Perfect), &p, 0).unwrap_err();
        assert!(e.to_string().contains("N ≥ 2"));
        let p = single(4, vec![1.0; 4], 0.5);
        let e = lb_rate(&BoundSpec::new(ReceiverKind::Zf, Csi::Imperfect), &p, 0).unwrap_err();
        assert!(e.to_string().contains("N > U"));
        assert!(matches!(
            lb_rate(&BoundSpec::new(ReceiverKind::Mmse, Csi::Perfect), &single(8, vec![1.0], 1.0), 0),
            Err(Error::Unsupported(_))
        ));
    }

    /// E[1/Υ] assembled term by term, before the algebraic simplification.
    fn mrc_ip_multi_oracle(p: &LinkParams, u: usize) -> f64 {
        let LargeScale::Multi { beta, serving } = &p.large_scale else { unreachable!() };
        let (pp, s2, n) = (p.pp(), p.noise_var, p.antennas as f64);
        let gam = p.gamma();
        let mut x = p.mu_n().unwrap() + s2 / (2.0 * p.pd);
        let mut contamination = 0.0;
        for (i, row) in beta.iter().enumerate() {
            if i == *serving {
                continue;
            }
            contamination += row[u] * row[u];
            for j in 0..p.users {
                if j != u {
                    x += pp * row[j] * row[j] / (pp * gam[j] + s2);
                }
            }
        }
        for j in 0..p.users {
            if j != u {
                x += pp / (pp * gam[j] + s2);
            }
        }
        let inv = x * (pp * gam[u] + s2) / (pp * (n - 1.0)) + contamination;
        (1.0 + 1.0 / inv).log2()
    }

    fn zf_ip_multi_oracle(p: &LinkParams, u: usize) -> f64 {
        let LargeScale::Multi { beta, serving } = &p.large_scale else { unreachable!() };
        let (pp, s2, n, nu) = (p.pp(), p.noise_var, p.antennas as f64, p.users as f64);
        let gam = p.gamma();
        let mut x = p.mu_n().unwrap() + s2 / (2.0 * p.pd);
        for (i, row) in beta.iter().enumerate() {
            if i != *serving {
                for j in 0..p.users {
                    x += pp * row[j] * row[j] / (pp * gam[j] + s2);
                }
            }
        }
        let inv = x * (pp * gam[u] + s2) / (pp * (n - nu));
        (1.0 + 1.0 / inv).log2()
    }

    fn random_multi(seed: u64, cells: usize) -> LinkParams {
        let mut s = crate::rng::RngStream::new(seed, 0);
        let users = 4;
        let beta: Vec<Vec<f64>> = (0..cells)
            .map(|i| (0..users).map(|_| if i == 0 { 1.0 } else { 0.3 * s.uniform() }).collect())
            .collect();
        let pd = 0.1 + 3.0 * s.uniform();
        LinkParams::new(16 + (seed as usize % 40), 4, pd, 0.5 + s.uniform(), LargeScale::Multi { beta, serving: 0 })
            .unwrap()
    }

    #[test]
    fn multi_cell_bounds_match_term_by_term_oracle() {
        for seed in 0..10 {
            let p = random_multi(seed, 7);
            for u in 0..p.users {
                let a = lb_rate(&BoundSpec::new(ReceiverKind::Mrc, Csi::Imperfect), &p, u).unwrap();
                assert!((a - mrc_ip_multi_oracle(&p, u)).abs() <= 1e-12, "mrc seed {seed}");
                let b = lb_rate(&BoundSpec::new(ReceiverKind::Zf, Csi::Imperfect), &p, u).unwrap();
                assert!((b - zf_ip_multi_oracle(&p, u)).abs() <= 1e-12, "zf seed {seed}");
            }
        }
    }

    #[test]
    fn multi_cell_reduces_to_single_cell() {
        for seed in 0..10 {
            let mut s = crate::rng::RngStream::new(100 + seed, 0);
            let pd = 0.05 + 5.0 * s.uniform();
            let n = 10 + (seed as usize) * 7;
            let m = LinkParams::new(n, 4, pd, 1.0, LargeScale::Multi { beta: vec![vec![1.0; 4]], serving: 0 }).unwrap();
            let sg = LinkParams::new(n, 4, pd, 1.0, LargeScale::Single(vec![1.0; 4])).unwrap();
            for r in [ReceiverKind::Mrc, ReceiverKind::Zf] {
                for c in [Csi::Perfect, Csi::Imperfect] {
                    let spec = BoundSpec::new(r, c);
                    for u in 0..4 {
                        let a = lb_rate(&spec, &m, u).unwrap();
                        let b = lb_rate(&spec, &sg, u).unwrap();
                        assert!((a - b).abs() <= 1e-10, "{r:?} {c:?}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn stated_limits() {
        let p = single(64, vec![1.0; 8], 1.0);
        let perfect = BoundSpec::scaled(ReceiverKind::Zf, Csi::Perfect, Scaling::InvN, 10.0);
        assert_eq!(asymptote(&perfect, &p, 0).unwrap(), Asymptote::Finite(11f64.log2()));
        let ip = BoundSpec::scaled(ReceiverKind::Mrc, Csi::Imperfect, Scaling::InvSqrtN, 1.0);
        assert_eq!(asymptote(&ip, &p, 0).unwrap(), Asymptote::Finite(9f64.log2()));
        let ip_n = BoundSpec::scaled(ReceiverKind::Zf, Csi::Imperfect, Scaling::InvN, 1.0);
        assert_eq!(asymptote(&ip_n, &p, 0).unwrap(), Asymptote::Finite(0.0));
        let up = BoundSpec::scaled(ReceiverKind::Mrc, Csi::Perfect, Scaling::InvSqrtN, 1.0);
        assert_eq!(asymptote(&up, &p, 0).unwrap(), Asymptote::Unbounded);
        let mm = BoundSpec::scaled(ReceiverKind::Mmse, Csi::Perfect, Scaling::InvN, 1.0);
        assert!(matches!(asymptote(&mm, &p, 0), Err(Error::Unsupported(_))));
        assert!(asymptote(&BoundSpec::new(ReceiverKind::Zf, Csi::Perfect), &p, 0).is_err());
    }

    #[test]
    fn bound_approaches_limit() {
        // |LB − limit| shrinks along the schedule.
        let e = 10f64.powf(0.5);
        for (csi, scaling) in [(Csi::Perfect, Scaling::InvN), (Csi::Imperfect, Scaling::InvSqrtN)] {
            for r in [ReceiverKind::Mrc, ReceiverKind::Zf] {
                let spec = BoundSpec::scaled(r, csi, scaling, e);
                let mut last = f64::INFINITY;
                for n in [256, 512, 1024, 4096] {
                    let p = single(n, vec![0.749, 0.045, 0.246, 0.121, 0.125, 0.142, 0.635, 0.256], scaling.pd(e, n));
                    let Asymptote::Finite(lim) = asymptote(&spec, &p, 0).unwrap() else { panic!() };
                    let gap = (lb_rate(&spec, &p, 0).unwrap() - lim).abs();
                    assert!(gap < last, "{r:?} {csi:?} N={n}");
                    last = gap;
                }
            }
        }
    }

    #[test]
    fn sum_rate_overhead() {
        let p = single(16, vec![1.0; 8], 1.0);
        assert_eq!(sum_rate(&[1.0; 8], Csi::Imperfect, &p).unwrap(), 8.0 * 188.0 / 196.0);
        assert_eq!(sum_rate(&[1.0; 8], Csi::Perfect, &p).unwrap(), 8.0);
        assert_eq!(sum_rate(&[0.0; 8], Csi::Imperfect, &p).unwrap(), 0.0);
        assert!(sum_rate(&[f64::NAN], Csi::Perfect, &p).is_err());
    }
}
