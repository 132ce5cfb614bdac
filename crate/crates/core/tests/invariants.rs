use proptest::prelude::*;

use fbmc_mimo::analysis::{draw_channels, sinr_closed_form, BoundSpec, Csi, LargeScale, LinkParams, ReceiverKind};
use fbmc_mimo::detection::build_combiner;
use fbmc_mimo::estimation::{build_pilots, PilotCoupling};
use fbmc_mimo::harness::{csv_string, parse_csv, preset, Bound, Curve, Mode, ResultRow, SweepVar};
use fbmc_mimo::linalg::{gram, hermitian_solve, CMat, C64};
use fbmc_mimo::rng::RngStream;
use fbmc_mimo::waveform::{build_iota, synthesize_direct, xi_table, FilterBank, Ofdm, OqamGrid, QamGrid};

fn cmat(s: &mut RngStream, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| s.cn(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_solve_recovers_rhs(seed in 0u64..1000, n in 1usize..12, cols in 1usize..4) {
        let mut s = RngStream::new(seed, 0);
        let a = gram(&cmat(&mut s, n + 4, n)).add_diag(0.1);
        let b = cmat(&mut s, n, cols);
        let x = hermitian_solve(&a, &b).unwrap();
        let r = a.mul(&x);
        let err = r.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * b.max_abs());
    }

    #[test]
    fn streams_are_pure_functions_of_seed_and_id(seed: u64, id: u64) {
        let mut a = RngStream::new(seed, id);
        let mut b = RngStream::new(seed, id);
        let mut c = RngStream::new(seed, id.wrapping_add(1));
        let xa: Vec<f64> = (0..8).map(|_| a.normal()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.normal()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.normal()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
    }

    #[test]
    fn zf_perfect_csi_inverts_the_channel(seed in 0u64..1000, users in 1usize..8, extra in 0usize..24) {
        let mut s = RngStream::new(seed, 1);
        let g = cmat(&mut s, users + extra + 1, users);
        let a = build_combiner(ReceiverKind::Zf, &g, 0.0).unwrap();
        let p = a.adjoint().mul(&g);
        let off = p.add(&CMat::identity(users).scale(-1.0)).max_abs();
        prop_assert!(off <= 1e-10, "{off}");
    }

    #[test]
    fn estimate_and_error_split_the_prior(seed in 0u64..1000, pdb in -10.0f64..20.0) {
        let beta = vec![0.749, 0.045, 0.246, 0.121];
        let p = LinkParams::new(16, 4, 10f64.powf(pdb / 10.0) / 2.0, 1.0, LargeScale::Single(beta.clone())).unwrap();
        let d = draw_channels(&p, Csi::Imperfect, &mut RngStream::new(seed, 2)).unwrap();
        let e = d.estimate.unwrap();
        for u in 0..4 {
            prop_assert!((e.est_var[u] + e.err_var[u] - beta[u]).abs() <= 1e-12);
        }
    }

    #[test]
    fn one_cell_multicell_reduces_to_single_cell(seed in 0u64..1000, n in 8usize..64) {
        // The multi-cell model normalizes the home-cell gains to 1.
        let beta = vec![1.0; 4];
        let single = LinkParams::new(n, 4, 2.0, 1.0, LargeScale::Single(beta.clone())).unwrap();
        let multi = LinkParams::new(n, 4, 2.0, 1.0, LargeScale::Multi { beta: vec![beta], serving: 0 }).unwrap();
        for rx in [ReceiverKind::Mrc, ReceiverKind::Zf] {
            for csi in [Csi::Perfect, Csi::Imperfect] {
                let ds = draw_channels(&single, csi, &mut RngStream::new(seed, 3)).unwrap();
                let dm = draw_channels(&multi, csi, &mut RngStream::new(seed, 3)).unwrap();
                let spec = BoundSpec::new(rx, csi);
                let a = sinr_closed_form(&spec, &single, &ds).unwrap();
                let b = sinr_closed_form(&spec, &multi, &dm).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x / y - 1.0).abs() <= 1e-10, "{} {}: {x} vs {y}", rx.name(), csi.name());
                }
            }
        }
    }

    #[test]
    fn ofdm_round_trip_is_exact(seed in 0u64..1000, log_m in 2u32..7, cp in 0usize..5, symbols in 1usize..5) {
        let m = 1usize << log_m;
        let ofdm = Ofdm::new(m, cp);
        let mut s = RngStream::new(seed, 4);
        let c = QamGrid::from_fn(m, symbols, |_, _| s.cn(2.0));
        let back = ofdm.demodulate(&ofdm.modulate(&c).unwrap(), symbols).unwrap();
        for k in 0..symbols {
            for i in 0..m {
                prop_assert!((back.get(i, k) - c.get(i, k)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trips_any_rows(values in prop::collection::vec((-1e6f64..1e6, 0.0f64..10.0, any::<bool>()), 1..20)) {
        let rows: Vec<ResultRow> = values
            .iter()
            .map(|&(x, ci, na)| ResultRow {
                sweep_var: SweepVar::PowerDb,
                sweep_value: x,
                receiver: ReceiverKind::Zf,
                csi: Csi::Imperfect,
                rate_sim: x.abs() / 3.0,
                rate_ci95: ci,
                rate_lb: if na { Bound::Na } else { Bound::Value(x / 7.0) },
                asymptote: if na { Bound::Unbounded } else { Bound::Value(ci) },
                mode: Mode::Analytic,
                seed: 42,
            })
            .collect();
        let curve = Curve { label: None, scenario: preset("fig2b").unwrap(), rows };
        let (s, back) = parse_csv(&csv_string(&curve).unwrap()).unwrap();
        prop_assert_eq!(s, curve.scenario);
        prop_assert_eq!(back, curve.rows);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn polyphase_synthesis_matches_direct_sum(seed in 0u64..1000, log_m in 3u32..6, k in 1usize..10) {
        let m = 1usize << log_m;
        let bank = FilterBank::new(build_iota(m, 4).unwrap());
        let mut s = RngStream::new(seed, 5);
        let d = OqamGrid::from_fn(m, k, |_, _| s.normal());
        let fast = bank.synthesize(&d).unwrap();
        let slow = synthesize_direct(&bank, &d);
        prop_assert_eq!(fast.len(), slow.len());
        let err = fast.iter().zip(&slow).map(|(a, b): (&C64, &C64)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn training_matrix_is_orthogonal(seed in 0u64..1000, log_k in 0u32..4, drop in 0usize..8) {
        let k = 1usize << log_k;
        let users = k - drop.min(k - 1);
        let bank = FilterBank::new(build_iota(32, 4).unwrap());
        let coupling = PilotCoupling::new(&bank, &xi_table(&bank, 4));
        let pd = 0.7;
        let f = build_pilots(k, users, pd, &coupling, &mut RngStream::new(seed, 6)).unwrap();
        for m in [0, 7, 31] {
            let b = f.training_matrix(m);
            let bb = b.adjoint().mul(&b);
            for i in 0..users {
                for j in 0..users {
                    if i == j {
                        prop_assert!((bb[(i, j)].re / f.pilot_power - 1.0).abs() <= 0.02);
                    } else {
                        prop_assert!(bb[(i, j)].norm() <= 1e-12 * f.pilot_power);
                    }
                }
            }
        }
    }
}
