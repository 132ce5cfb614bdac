use rayon::prelude::*;

use crate::analysis::{
    draw_channels, lb_rate, ofdm_sinr, sinr_closed_form, sum_asymptote, sum_rate, Asymptote, BoundSpec, Csi,
    LinkParams,
};
use crate::detection::{Link, SerEstimate, Waveform};
use crate::error::{Error, Result};
use crate::rng::{stream_id, Purpose, RngStream};
use crate::stats::Moments;

use super::output::{Bound, Curve, ResultRow};
use super::scenario::{Experiment, Mode, Scenario};

/// Per-trial results, indexed `[csi][receiver]`.
struct TrialOut {
    sim: Vec<Vec<f64>>,
    ser: Vec<Vec<SerEstimate>>,
    bounds: Option<Vec<Vec<(Bound, Bound)>>>,
}

fn bound_of(r: Result<f64>) -> Result<Bound> {
    match r {
        Ok(v) => Ok(Bound::Value(v)),
        Err(Error::Unsupported(_)) | Err(Error::InvalidParameter(_)) => Ok(Bound::Na),
        Err(e) => Err(e),
    }
}

/// Closed-form sum-rate bound and its large-N limit.
fn bounds(s: &Scenario, p: &LinkParams, csi: Csi, rx: crate::analysis::ReceiverKind) -> Result<(Bound, Bound)> {
    let spec = BoundSpec::scaled(rx, csi, s.scaling, s.user_power());
    let lb = bound_of((|| {
        let per_user = (0..p.users).map(|u| lb_rate(&spec, p, u)).collect::<Result<Vec<_>>>()?;
        sum_rate(&per_user, csi, p)
    })())?;
    let asym = match sum_asymptote(&spec, p) {
        Ok(Asymptote::Finite(v)) => Bound::Value(v),
        Ok(Asymptote::Unbounded) => Bound::Unbounded,
        Err(Error::Unsupported(_)) | Err(Error::InvalidParameter(_)) => Bound::Na,
        Err(e) => return Err(e),
    };
    Ok((lb, asym))
}

fn all_bounds(s: &Scenario, p: &LinkParams) -> Result<Vec<Vec<(Bound, Bound)>>> {
    s.csi
        .iter()
        .map(|&csi| s.receivers.iter().map(|&rx| bounds(s, p, csi, rx)).collect())
        .collect()
}

fn trial_params(s: &Scenario, trial: usize) -> Result<LinkParams> {
    let mut scene = RngStream::new(s.seed, stream_id(Purpose::Scene, 0, trial));
    let ls = s.geometry.large_scale(s.users, &mut scene)?;
    s.link_params(ls)
}

fn analytic_trial(s: &Scenario, point: usize, trial: usize) -> Result<TrialOut> {
    let p = trial_params(s, trial)?;
    let mut sim = Vec::with_capacity(s.csi.len());
    for &csi in &s.csi {
        // Perfect and estimated CSI share the channel draw.
        let mut stream = RngStream::new(s.seed, stream_id(Purpose::Channel, point, trial));
        let draw = draw_channels(&p, csi, &mut stream)?;
        let mut row = Vec::with_capacity(s.receivers.len());
        for &rx in &s.receivers {
            let spec = BoundSpec::new(rx, csi);
            let sinr = match s.waveform {
                Waveform::Fbmc => sinr_closed_form(&spec, &p, &draw)?,
                Waveform::Ofdm => ofdm_sinr(&spec, &p, &draw)?,
            };
            let rates: Vec<f64> = sinr.iter().map(|x| (1.0 + x).log2()).collect();
            row.push(sum_rate(&rates, csi, &p)?);
        }
        sim.push(row);
    }
    let bounds = if s.geometry.is_random() { Some(all_bounds(s, &p)?) } else { None };
    Ok(TrialOut { sim, ser: Vec::new(), bounds })
}

fn waveform_trial(s: &Scenario, links: &[Link], point: usize, trial: usize) -> Result<TrialOut> {
    let p = trial_params(s, trial)?;
    let mut sim = Vec::with_capacity(s.csi.len());
    let mut ser = Vec::with_capacity(s.csi.len());
    for (ci, &csi) in s.csi.iter().enumerate() {
        let link = links[ci].with_params(p.clone())?;
        let mut stream = RngStream::new(s.seed, stream_id(Purpose::Channel, point, trial));
        let out = link.run(&s.receivers, &mut stream)?;
        let overhead = p.overhead(csi);
        sim.push(out.iter().map(|o| o.sum_rate(overhead)).collect());
        ser.push(out.iter().map(|o| o.ser).collect());
    }
    let bounds = if s.geometry.is_random() { Some(all_bounds(s, &p)?) } else { None };
    Ok(TrialOut { sim, ser, bounds })
}

fn mean_bound(xs: impl Iterator<Item = Bound>) -> Bound {
    let mut acc = Moments::default();
    for b in xs {
        match b {
            Bound::Value(v) => acc.push(v),
            other => return other,
        }
    }
    if acc.count() == 0 {
        Bound::Na
    } else {
        Bound::Value(acc.mean())
    }
}

/// One sweep point of a series-free scenario.
pub fn run_point(s: &Scenario, point: usize) -> Result<Vec<ResultRow>> {
    let links = if s.mode == Mode::Waveform {
        let p0 = trial_params(s, 0)?;
        s.csi
            .iter()
            .map(|&csi| Link::new(s.link_config(p0.clone(), csi)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let trials: Vec<TrialOut> = (0..s.trials)
        .into_par_iter()
        .map(|t| match s.mode {
            Mode::Analytic => analytic_trial(s, point, t),
            Mode::Waveform => waveform_trial(s, &links, point, t),
        })
        .collect::<Result<_>>()?;

    let fixed = if s.geometry.is_random() { None } else { Some(all_bounds(s, &trial_params(s, 0)?)?) };
    let mut rows = Vec::new();
    for (ci, &csi) in s.csi.iter().enumerate() {
        for (ri, &rx) in s.receivers.iter().enumerate() {
            let (rate_sim, rate_ci95, rate_lb, asymptote) = match s.experiment {
                Experiment::Rate => {
                    let m = Moments::from_slice(&trials.iter().map(|t| t.sim[ci][ri]).collect::<Vec<_>>());
                    let (lb, asym) = match &fixed {
                        Some(b) => b[ci][ri],
                        None => (
                            mean_bound(trials.iter().map(|t| t.bounds.as_ref().unwrap()[ci][ri].0)),
                            mean_bound(trials.iter().map(|t| t.bounds.as_ref().unwrap()[ci][ri].1)),
                        ),
                    };
                    (m.mean(), m.ci95(), lb, asym)
                }
                Experiment::Ser => {
                    let e = trials
                        .iter()
                        .map(|t| t.ser[ci][ri])
                        .fold(SerEstimate::from_counts(0, 0), SerEstimate::merge);
                    (e.ser, e.half_width(), Bound::Na, Bound::Na)
                }
            };
            rows.push(ResultRow {
                sweep_var: s.sweep.var,
                sweep_value: 0.0,
                receiver: rx,
                csi,
                rate_sim,
                rate_ci95,
                rate_lb,
                asymptote,
                mode: s.mode,
                seed: s.seed,
            });
        }
    }
    Ok(rows)
}

/// Runs every series entry and sweep point. Results depend only on the
/// scenario (including its seed), not on the number of worker threads.
pub fn run_scenario(s: &Scenario) -> Result<Vec<Curve>> {
    s.validate()?;
    let n = s.sweep.values.len();
    let mut curves = Vec::new();
    for (si, (label, sc)) in s.expand().into_iter().enumerate() {
        let mut rows = Vec::new();
        for (pi, &x) in sc.sweep.values.iter().enumerate() {
            let mut r = run_point(&sc.at(x), si * n + pi)?;
            for row in &mut r {
                row.sweep_value = x;
            }
            rows.extend(r);
        }
        curves.push(Curve { label, scenario: sc, rows });
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{csv_string, preset};

    fn small(name: &str) -> Scenario {
        let mut s = preset(name).unwrap();
        s.trials = 100;
        s.sweep.values.truncate(2);
        s
    }

    #[test]
    fn same_seed_gives_identical_output_on_any_pool() {
        let s = small("fig5a");
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_scenario(&s).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(csv_string(&a[0]).unwrap(), csv_string(&b[0]).unwrap());
    }

    #[test]
    fn first_trial_is_independent_of_trial_count() {
        let mut s = small("fig2a");
        s.sweep.values.truncate(1);
        let one = analytic_trial(&s, 0, 0).unwrap();
        s.trials = 200;
        let again = analytic_trial(&s, 0, 0).unwrap();
        assert_eq!(one.sim, again.sim);
    }

    #[test]
    fn rows_cover_every_receiver_and_csi() {
        let s = small("fig2a");
        let c = run_scenario(&s).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].rows.len(), 2 * 3 * 2);
        for r in &c[0].rows {
            assert!(r.rate_sim.is_finite() && r.rate_ci95 >= 0.0);
            if r.receiver == crate::analysis::ReceiverKind::Mmse {
                assert_eq!(r.rate_lb, Bound::Na);
            } else {
                assert!(r.rate_lb.value().unwrap() <= r.rate_sim + 3.0 * r.rate_ci95);
            }
        }
    }
}
