//! Full waveform link: per-user FBMC or CP-OFDM frames through frequency
//! selective channels (optionally with a common carrier frequency offset),
//! per-antenna demodulation, per-subcarrier estimation and combining.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{analytic_training, Csi, LargeScale, LinkParams, ReceiverKind};
use crate::channel::{cfr_at, draw_taps, propagate, TapChannel};
use crate::error::{invalid, Error, Result};
use crate::estimation::{lmmse_multicell, lmmse_single, receive_pilots};
use crate::linalg::{dot, CMat, CVec, C64};
use crate::rng::RngStream;
use crate::waveform::{
    apply_cfo, qam_to_oqam, Modem, ModemConfig, ModemRegistry, OqamGrid, QamGrid, SlotGrid,
};

use super::combiner::Combiner;
use super::measure::{Modulation, SerEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Fbmc,
    Ofdm,
}

impl Waveform {
    pub fn name(self) -> &'static str {
        match self {
            Waveform::Fbmc => "fbmc",
            Waveform::Ofdm => "ofdm",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkConfig {
    pub waveform: Waveform,
    pub params: LinkParams,
    pub csi: Csi,
    /// Channel taps L (equal power).
    pub taps: usize,
    /// Prototype overlap factor for FBMC.
    pub overlap: usize,
    /// Normalized CFO, common to all users.
    pub cfo: f64,
    pub modulation: Modulation,
    /// QAM data symbols per subcarrier and frame.
    pub data_symbols: usize,
}

/// Per-receiver result of one frame.
#[derive(Debug, Clone)]
pub struct LinkOutcome {
    pub receiver: ReceiverKind,
    /// Per-user rate, averaged over subcarriers, without training overhead.
    pub user_rates: Vec<f64>,
    pub ser: SerEstimate,
}

impl LinkOutcome {
    pub fn sum_rate(&self, overhead: f64) -> f64 {
        overhead * self.user_rates.iter().sum::<f64>()
    }
}

/// Frame-invariant state: the modem and the lag weights of its pulse.
pub struct Link {
    config: LinkConfig,
    modem: Arc<dyn Modem>,
    fbmc: bool,
    /// Gain with which a channel tap at lag l reaches the symbol it carries:
    /// the prototype autocorrelation Σ p[n]p[n+l] for FBMC, 1 within the
    /// cyclic prefix for OFDM.
    lag_weights: Vec<f64>,
    training: Option<CMat>,
}

fn autocorrelation(p: &[f64], lag: usize) -> f64 {
    p.iter().zip(p.iter().skip(lag)).map(|(a, b)| a * b).sum()
}

impl Link {
    pub fn new(config: LinkConfig) -> Result<Self> {
        config.params.validate()?;
        if config.data_symbols == 0 {
            return invalid("frame needs at least one data symbol");
        }
        let m = config.params.subcarriers;
        let registry = ModemRegistry::default();
        let mc = ModemConfig { num_subcarriers: m, overlap: config.overlap, cp_len: config.taps };
        let modem: Arc<dyn Modem> = Arc::from(registry.build(config.waveform.name(), &mc)?);
        let lag_weights = match modem.filter_bank() {
            Some(bank) => (0..config.taps).map(|l| autocorrelation(bank.filter().taps(), l)).collect(),
            None => vec![1.0; config.taps],
        };
        let fbmc = modem.filter_bank().is_some();
        let training = match config.csi {
            Csi::Perfect => None,
            Csi::Imperfect => Some(analytic_training(&config.params)?),
        };
        Ok(Link { config, modem, fbmc, lag_weights, training })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    /// Same modem with other large-scale gains.
    pub fn with_params(&self, params: LinkParams) -> Result<Link> {
        params.validate()?;
        let old = &self.config.params;
        if params.users != old.users || params.pilots != old.pilots || params.subcarriers != old.subcarriers {
            return invalid("rebinding a link may only change powers, gains and antenna count");
        }
        let training = match self.config.csi {
            Csi::Perfect => None,
            Csi::Imperfect => Some(analytic_training(&params)?),
        };
        let mut config = self.config.clone();
        config.params = params;
        Ok(Link { config, modem: self.modem.clone(), fbmc: self.fbmc, lag_weights: self.lag_weights.clone(), training })
    }

    fn transmit(&self, data: &QamGrid) -> Result<(CVec, usize)> {
        let slots = self.modem.slots_for(data.num_symbols());
        let mut x = match self.modem.filter_bank() {
            Some(bank) => {
                // Trailing zero half-symbols so the last data pulses are complete.
                let d = qam_to_oqam(data);
                let mut g = OqamGrid::zeros(d.num_subcarriers(), slots + self.config.overlap);
                for k in 0..slots {
                    for mm in 0..d.num_subcarriers() {
                        g.set(mm, k, d.get(mm, k));
                    }
                }
                bank.synthesize(&g)?
            }
            None => self.modem.transmit(data)?,
        };
        if self.config.cfo != 0.0 {
            x = apply_cfo(&x, self.config.cfo, self.config.params.subcarriers)?;
        }
        Ok((x, slots))
    }

    /// Per-subcarrier channel seen by a data symbol.
    fn effective(&self, taps: &TapChannel) -> Result<TapChannel> {
        let l = taps.len();
        let mut w = Vec::with_capacity(taps.antennas() * taps.users() * l);
        for n in 0..taps.antennas() {
            for u in 0..taps.users() {
                w.extend(taps.taps(n, u).iter().zip(&self.lag_weights).map(|(g, a)| g * *a));
            }
        }
        TapChannel::from_taps(taps.antennas(), taps.users(), l, w)
    }

    /// One frame: draws data, channels and noise, then evaluates every
    /// receiver in `receivers` on the same observations.
    pub fn run(&self, receivers: &[ReceiverKind], stream: &mut RngStream) -> Result<Vec<LinkOutcome>> {
        let cfg = &self.config;
        let p = &cfg.params;
        let m = p.subcarriers;
        let rows = p.beta_rows();
        let serving = p.serving();
        let users = p.users;
        let pd = p.pd;

        // Data of every user in every cell.
        let data: Vec<Vec<QamGrid>> = rows
            .iter()
            .map(|_| {
                (0..users)
                    .map(|_| QamGrid::from_fn(m, cfg.data_symbols, |_, _| cfg.modulation.draw(pd, stream)))
                    .collect()
            })
            .collect();

        let mut channels: Vec<TapChannel> = Vec::with_capacity(rows.len());
        let mut received: Option<Vec<CVec>> = None;
        let mut slots = 0;
        for (cell, beta) in rows.iter().enumerate() {
            let mut signals = Vec::with_capacity(users);
            for u in 0..users {
                let (s, k) = self.transmit(&data[cell][u])?;
                slots = k;
                signals.push(s);
            }
            let taps = draw_taps(stream, p.antennas, users, cfg.taps)?;
            let y = propagate(&signals, &taps, beta, 0.0, stream)?;
            received = Some(match received {
                None => y,
                Some(mut acc) => {
                    for (a, b) in acc.iter_mut().zip(&y) {
                        for (x, z) in a.iter_mut().zip(b) {
                            *x += z;
                        }
                    }
                    acc
                }
            });
            channels.push(self.effective(&taps)?);
        }
        let mut received = received.ok_or_else(|| Error::InvalidParameter("no cells".into()))?;
        if p.noise_var > 0.0 {
            for y in &mut received {
                for v in y.iter_mut() {
                    *v += stream.cn(p.noise_var);
                }
            }
        }
        let need = self.modem.signal_len(slots);
        let demod: Vec<SlotGrid> = received
            .iter_mut()
            .map(|y| {
                if y.len() < need {
                    y.resize(need, C64::new(0.0, 0.0));
                }
                self.modem.receive(y, slots)
            })
            .collect::<Result<_>>()?;

        // Common phase of the offset at each slot, known to the receiver.
        let derotate: Vec<C64> = (0..slots)
            .map(|s| C64::from_polar(1.0, -2.0 * PI * cfg.cfo * self.modem.centre_sample(s) / m as f64))
            .collect();

        // Per-subcarrier CSI: the effective channel itself, or its LMMSE
        // estimate from orthogonal training in the per-subcarrier model.
        let mut csi_mats = Vec::with_capacity(m);
        for mm in 0..m {
            let mut per_cell: Vec<CMat> =
                channels.iter().zip(&rows).map(|(c, b)| cfr_at(c, b, mm, m)).collect::<Result<_>>()?;
            let est = match &self.training {
                None => per_cell[serving].clone(),
                Some(b) => {
                    let refs: Vec<&CMat> = per_cell.iter().collect();
                    let y = receive_pilots(&refs, b, p.noise_var, stream)?;
                    let bundle = match &p.large_scale {
                        LargeScale::Single(beta) => lmmse_single(&y, b, beta, p.noise_var)?,
                        LargeScale::Multi { beta, serving } => lmmse_multicell(&y, b, beta, *serving, p.noise_var)?,
                    };
                    bundle.ghat
                }
            };
            csi_mats.push((per_cell.swap_remove(serving), est));
        }

        let fbmc = self.fbmc;
        let mut out = Vec::with_capacity(receivers.len());
        for &kind in receivers {
            let mut rate_acc = vec![0.0; users];
            let mut combined: Vec<SlotGrid> = vec![vec![vec![C64::new(0.0, 0.0); m]; slots]; users];
            for (mm, (truth, est)) in csi_mats.iter().enumerate() {
                let comb = Combiner::new(kind, cfg.csi, est, p.noise_var, pd, p.error_sum())?;
                let a = &comb.matrix;
                let gains: Vec<C64> = (0..users).map(|u| dot(&a.col(u), &truth.col(u))).collect();
                let mut resid = vec![0.0; users];
                for k in 0..slots {
                    let y: CVec = demod.iter().map(|d| d[k][mm] * derotate[k]).collect();
                    let z = a.adj_mul_vec(&y);
                    for u in 0..users {
                        combined[u][k][mm] = z[u];
                        if fbmc {
                            let v = z[u].re - gains[u].re * sent_oqam(&data[serving][u], mm, k);
                            resid[u] += v * v;
                        } else {
                            let v = z[u] - gains[u] * data[serving][u].get(mm, k);
                            resid[u] += v.norm_sqr();
                        }
                    }
                }
                for u in 0..users {
                    let signal = if fbmc { gains[u].re.powi(2) * pd } else { gains[u].norm_sqr() * 2.0 * pd };
                    rate_acc[u] += (1.0 + signal / (resid[u] / slots as f64)).log2();
                }
            }
            let mut errors = 0u64;
            let mut symbols = 0u64;
            for u in 0..users {
                let est = self.modem.to_qam(&combined[u])?;
                let sent = &data[serving][u];
                for k in 0..cfg.data_symbols {
                    for mm in 0..m {
                        symbols += 1;
                        if cfg.modulation.decide(est.get(mm, k)) != cfg.modulation.pattern(sent.get(mm, k)) {
                            errors += 1;
                        }
                    }
                }
            }
            out.push(LinkOutcome {
                receiver: kind,
                user_rates: rate_acc.iter().map(|r| r / m as f64).collect(),
                ser: SerEstimate::from_counts(errors, symbols),
            });
        }
        Ok(out)
    }
}

/// The OQAM symbol carried at data half-symbol `k` of subcarrier `m`.
fn sent_oqam(c: &QamGrid, m: usize, k: usize) -> f64 {
    let q = c.get(m, k / 2);
    // Even subcarriers send the real part first.
    if (m % 2 == 0) == (k % 2 == 0) { q.re } else { q.im }
}

/// Builds the link and runs one frame.
pub fn run_link(config: &LinkConfig, receivers: &[ReceiverKind], stream: &mut RngStream) -> Result<Vec<LinkOutcome>> {
    Link::new(config.clone())?.run(receivers, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(waveform: Waveform, csi: Csi, taps: usize, noise_var: f64) -> LinkConfig {
        let mut params = LinkParams::new(16, 4, 5.0, noise_var, LargeScale::Single(vec![1.0, 0.5, 0.8, 0.3])).unwrap();
        params.subcarriers = 32;
        LinkConfig {
            waveform,
            params,
            csi,
            taps,
            overlap: 4,
            cfo: 0.0,
            modulation: Modulation::Qam4,
            data_symbols: 8,
        }
    }

    #[test]
    fn oqam_slot_mapping_matches_grid_mapping() {
        let mut s = RngStream::new(1, 0);
        let c = QamGrid::from_fn(6, 3, |_, _| C64::new(s.normal(), s.normal()));
        let d = qam_to_oqam(&c);
        for m in 0..6 {
            for k in 0..6 {
                assert_eq!(sent_oqam(&c, m, k), d.get(m, k));
            }
        }
    }

    #[test]
    fn flat_noiseless_zf_is_error_free_in_both_waveforms() {
        for w in [Waveform::Fbmc, Waveform::Ofdm] {
            let out = run_link(&cfg(w, Csi::Perfect, 1, 0.0), &[ReceiverKind::Zf], &mut RngStream::new(2, 0)).unwrap();
            assert_eq!(out[0].ser.errors, 0, "{w:?}");
            // FBMC keeps only the prototype truncation residual.
            assert!(out[0].user_rates.iter().all(|r| *r > 8.0), "{w:?} {:?}", out[0].user_rates);
        }
    }

    #[test]
    fn estimated_csi_runs_and_is_close_to_perfect() {
        let mut rp = 0.0;
        let mut ri = 0.0;
        for seed in 0..4 {
            let r = run_link(&cfg(Waveform::Fbmc, Csi::Perfect, 2, 1.0), &[ReceiverKind::Mrc], &mut RngStream::new(seed, 1))
                .unwrap();
            rp += r[0].sum_rate(1.0);
            let r = run_link(&cfg(Waveform::Fbmc, Csi::Imperfect, 2, 1.0), &[ReceiverKind::Mrc], &mut RngStream::new(seed, 1))
                .unwrap();
            ri += r[0].sum_rate(1.0);
        }
        assert!(ri < rp && ri > 0.7 * rp, "{ri} vs {rp}");
    }

    #[test]
    fn lag_weights_are_pulse_autocorrelation() {
        let link = Link::new(cfg(Waveform::Fbmc, Csi::Perfect, 20, 1.0)).unwrap();
        assert!((link.lag_weights[0] - 1.0).abs() < 1e-9);
        assert!(link.lag_weights.windows(2).all(|w| w[1] < w[0]));
        // Half a symbol of delay: the ξ(Δk=1, Δm=0) magnitude.
        let link = Link::new(cfg(Waveform::Fbmc, Csi::Perfect, 17, 1.0)).unwrap();
        assert!((link.lag_weights[16] - 0.441).abs() < 5e-3, "{}", link.lag_weights[16]);
        let link = Link::new(cfg(Waveform::Ofdm, Csi::Perfect, 5, 1.0)).unwrap();
        assert_eq!(link.lag_weights, vec![1.0; 5]);
    }
}
