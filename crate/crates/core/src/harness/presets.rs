//! Named experiments following the paper's figures, on Table I defaults.

use crate::analysis::{Csi, ReceiverKind, Scaling};
use crate::detection::{Modulation, Waveform};
use crate::error::{invalid, Result};

use super::scenario::{Experiment, Geometry, Mode, PowerRule, Scenario, Series, Sweep, SweepVar};

/// Single-cell large-scale fading of Table I.
pub const TABLE_D: [f64; 8] = [0.749, 0.045, 0.246, 0.121, 0.125, 0.142, 0.635, 0.256];

pub const PRESETS: [&str; 10] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig5a", "fig5b", "fig6a", "fig6b", "fig8a", "fig9b"];

const ANTENNA_GRID: [f64; 6] = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0];
const SCALING_GRID: [f64; 7] = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
const TAP_GRID: [f64; 5] = [6.0, 10.0, 20.0, 30.0, 40.0];

fn base(name: &str) -> Scenario {
    use ReceiverKind::*;
    Scenario {
        name: name.into(),
        mode: Mode::Analytic,
        experiment: Experiment::Rate,
        antennas: 128,
        users: 8,
        pilots: 8,
        subcarriers: 128,
        coherence: 196,
        power_db: 10.0,
        power_rule: PowerRule::PerUser,
        scaling: Scaling::None,
        noise_var: 1.0,
        geometry: Geometry::Single { beta: TABLE_D.to_vec() },
        receivers: vec![Mrc, Zf, Mmse],
        csi: vec![Csi::Perfect, Csi::Imperfect],
        waveform: Waveform::Fbmc,
        taps: 6,
        overlap: 4,
        cfo: 0.0,
        modulation: Modulation::Qam4,
        data_symbols: 16,
        sweep: Sweep { var: SweepVar::Antennas, values: ANTENNA_GRID.to_vec() },
        series: None,
        trials: 2000,
        seed: 1,
    }
}

fn power_grid() -> Vec<f64> {
    (-4..=4).map(|i| 5.0 * i as f64).collect()
}

pub fn preset(name: &str) -> Result<Scenario> {
    use ReceiverKind::*;
    let mut s = base(name);
    match name {
        "fig2a" => {}
        "fig2b" => {
            s.receivers = vec![Mrc, Zf];
            s.csi = vec![Csi::Imperfect];
            s.sweep = Sweep { var: SweepVar::PowerDb, values: power_grid() };
            s.series = Some(Series::Antennas(vec![64, 256]));
            s.trials = 1000;
        }
        "fig3a" => {
            s.power_db = 5.0;
            s.sweep = Sweep { var: SweepVar::Antennas, values: SCALING_GRID.to_vec() };
            s.series = Some(Series::Scaling(vec![Scaling::InvSqrtN, Scaling::InvN]));
            s.trials = 500;
        }
        "fig3b" => {
            s.mode = Mode::Waveform;
            s.antennas = 128;
            s.subcarriers = 64;
            s.receivers = vec![Mrc, Zf];
            s.csi = vec![Csi::Imperfect];
            s.sweep = Sweep { var: SweepVar::Taps, values: TAP_GRID.to_vec() };
            s.series = Some(Series::PowerDb(vec![10.0, 0.0, -10.0]));
            s.trials = 100;
        }
        "fig5a" => {
            s.geometry = Geometry::hexagonal();
            s.receivers = vec![Mrc, Zf];
        }
        "fig5b" => {
            s.geometry = Geometry::hexagonal();
            s.receivers = vec![Mrc, Zf];
            s.csi = vec![Csi::Imperfect];
            s.sweep = Sweep { var: SweepVar::PowerDb, values: power_grid() };
            s.series = Some(Series::Antennas(vec![64, 256]));
            s.trials = 1000;
        }
        "fig6a" => {
            s.geometry = Geometry::hexagonal();
            s.receivers = vec![Mrc, Zf];
            s.power_db = 5.0;
            s.sweep = Sweep { var: SweepVar::Antennas, values: SCALING_GRID.to_vec() };
            s.series = Some(Series::Scaling(vec![Scaling::InvSqrtN, Scaling::InvN]));
            s.trials = 500;
        }
        "fig6b" => {
            s.geometry = Geometry::hexagonal();
            s.receivers = vec![Mrc, Zf];
            s.csi = vec![Csi::Imperfect];
            s.power_rule = PowerRule::PerCell;
            s.sweep = Sweep { var: SweepVar::Users, values: (1..=8).map(|u| 2.0 * u as f64).collect() };
            s.series = Some(Series::PowerDb(vec![5.0, 0.0]));
            s.trials = 1000;
        }
        "fig8a" => {
            s.mode = Mode::Waveform;
            s.geometry = Geometry::hexagonal();
            s.subcarriers = 64;
            s.receivers = vec![Mrc, Zf];
            s.csi = vec![Csi::Imperfect];
            s.sweep = Sweep { var: SweepVar::Taps, values: TAP_GRID.to_vec() };
            s.series = Some(Series::PowerDb(vec![10.0, -10.0, -15.0]));
            s.trials = 100;
        }
        "fig9b" => {
            s.mode = Mode::Waveform;
            s.experiment = Experiment::Ser;
            s.antennas = 64;
            s.taps = 2;
            s.power_db = -5.0;
            s.geometry = Geometry::Single { beta: vec![1.0; 8] };
            s.receivers = vec![Zf];
            s.csi = vec![Csi::Perfect];
            s.modulation = Modulation::Bpsk;
            s.sweep = Sweep { var: SweepVar::Cfo, values: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3] };
            s.series = Some(Series::Waveform(vec![Waveform::Fbmc, Waveform::Ofdm]));
            s.trials = 200;
        }
        _ => return invalid(format!("unknown preset '{name}', known: {}", PRESETS.join(", "))),
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("fig4").is_err());
    }

    #[test]
    fn table_values() {
        let s = preset("fig2a").unwrap();
        match &s.geometry {
            Geometry::Single { beta } => assert_eq!(beta[0], 0.749),
            _ => panic!(),
        }
        assert_eq!((s.subcarriers, s.users, s.pilots, s.taps, s.coherence), (128, 8, 8, 6, 196));
        assert_eq!(s.noise_var, 1.0);
        assert_eq!(s.power_db, 10.0);

        let s = preset("fig9b").unwrap();
        assert_eq!((s.power_db, s.antennas, s.users, s.taps), (-5.0, 64, 8, 2));
        assert_eq!(s.modulation, Modulation::Bpsk);
        assert_eq!(s.receivers, vec![ReceiverKind::Zf]);

        let s = preset("fig3a").unwrap();
        assert_eq!(s.power_db, 5.0);
        assert_eq!(s.series, Some(Series::Scaling(vec![Scaling::InvSqrtN, Scaling::InvN])));

        let s = preset("fig3b").unwrap();
        assert_eq!((s.antennas, s.subcarriers, s.mode), (128, 64, Mode::Waveform));
    }
}
