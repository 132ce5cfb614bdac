//! Preamble with guard zeros and orthogonal virtual training.

use crate::error::{invalid, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::rng::RngStream;
use crate::waveform::{FilterBank, OqamGrid, XiTable};

/// Same-instant coupling ⟨ξ⟩^{m̄,k}_{m,k} over the full band (pilot instants
/// are even, so one table serves all of them).
#[derive(Debug, Clone)]
pub struct PilotCoupling {
    radius: usize,
    rows: Vec<Vec<f64>>,
}

impl PilotCoupling {
    pub fn new(bank: &FilterBank, xi: &XiTable) -> Self {
        PilotCoupling { radius: xi.radius(), rows: xi.same_instant_coupling(bank, 0) }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.rows.len()
    }

    /// I_m̄ = Σ_{m ≠ m̄} d_m ⟨ξ⟩^{m̄,0}_{m,0}.
    pub fn interference(&self, d: &[f64], m_ref: usize) -> f64 {
        let mm = self.rows.len() as i64;
        let r = self.radius as i64;
        let row = &self.rows[m_ref];
        let mut acc = 0.0;
        for (i, c) in row.iter().enumerate() {
            let dm = i as i64 - r;
            if dm != 0 {
                acc += c * d[(m_ref as i64 + dm).rem_euclid(mm) as usize];
            }
        }
        acc
    }
}

/// K×K ±1 Sylvester–Hadamard matrix.
pub fn sylvester(k: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    while h.len() < k {
        let n = h.len();
        let mut next = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

/// Training preamble shared by all users: user u sends `signs[i][u]·base`
/// at pilot instant i.
#[derive(Debug, Clone)]
pub struct PilotFrame {
    pub pilots: usize,
    pub users: usize,
    /// Zero half-symbols between consecutive pilots (1 by default).
    pub guard: usize,
    pub base: Vec<f64>,
    pub signs: Vec<Vec<f64>>,
    /// Virtual symbol b̄_m = base_m + j·I_m of the base pilot.
    pub virtual_symbols: CVec,
    pub pilot_power: f64,
}

impl PilotFrame {
    pub fn pilot_slot(&self, i: usize) -> usize {
        i * (1 + self.guard)
    }

    /// First half-symbol after the preamble.
    pub fn data_start(&self) -> usize {
        self.pilots * (1 + self.guard)
    }

    /// B_m: K×U, entries signs[i][u]·b̄_m.
    pub fn training_matrix(&self, m: usize) -> CMat {
        let b = self.virtual_symbols[m];
        CMat::from_fn(self.pilots, self.users, |i, u| b * self.signs[i][u])
    }

    /// Transmit grid of user u: preamble followed by `data` (may be empty).
    pub fn user_grid(&self, u: usize, data: &OqamGrid) -> OqamGrid {
        let m = self.base.len();
        assert_eq!(data.num_subcarriers(), m);
        let start = self.data_start();
        let mut g = OqamGrid::zeros(m, start + data.num_half_symbols());
        for i in 0..self.pilots {
            for (mm, v) in self.base.iter().enumerate() {
                g.set(mm, self.pilot_slot(i), self.signs[i][u] * v);
            }
        }
        for k in 0..data.num_half_symbols() {
            for mm in 0..m {
                g.set(mm, start + k, data.get(mm, k));
            }
        }
        g
    }
}

/// Random signs with amplitudes solved so that |b̄_m|² = 2 exactly.
fn solve_base(coupling: &PilotCoupling, stream: &mut RngStream) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = coupling.num_subcarriers();
    for _attempt in 0..64 {
        let signs: Vec<f64> = (0..m).map(|_| stream.sign()).collect();
        let mut amp = vec![1.0; m];
        for _ in 0..2000 {
            let d: Vec<f64> = signs.iter().zip(&amp).map(|(s, a)| s * a).collect();
            let interf: Vec<f64> = (0..m).map(|i| coupling.interference(&d, i)).collect();
            let worst = amp
                .iter()
                .zip(&interf)
                .map(|(a, i)| (a * a + i * i - 2.0).abs())
                .fold(0.0, f64::max);
            if worst < 1e-13 {
                return Ok((d, interf));
            }
            for (a, i) in amp.iter_mut().zip(&interf) {
                let target = (2.0 - i * i).max(0.05).sqrt();
                *a = 0.5 * *a + 0.5 * target;
            }
        }
    }
    Err(crate::Error::Numeric("pilot amplitude iteration did not converge".into()))
}

/// Builds the preamble: Sylvester signs over a common random base pilot whose
/// virtual symbols all have power 2·P_d, so B^H B = P_p I with P_p = 2·P_d·K.
pub fn build_pilots(
    pilots: usize,
    users: usize,
    pd: f64,
    coupling: &PilotCoupling,
    stream: &mut RngStream,
) -> Result<PilotFrame> {
    build_pilots_with_guard(pilots, users, pd, 1, coupling, stream)
}

pub fn build_pilots_with_guard(
    pilots: usize,
    users: usize,
    pd: f64,
    guard: usize,
    coupling: &PilotCoupling,
    stream: &mut RngStream,
) -> Result<PilotFrame> {
    if pilots < users {
        return invalid(format!("need K ≥ U pilots, got K={pilots}, U={users}"));
    }
    if !pilots.is_power_of_two() {
        return invalid(format!("K must be a power of two, got {pilots}"));
    }
    if !(pd > 0.0) {
        return invalid("pilot power must be positive");
    }
    let (d, interf) = solve_base(coupling, stream)?;
    let s = pd.sqrt();
    let base: Vec<f64> = d.iter().map(|v| v * s).collect();
    let virtual_symbols = base.iter().zip(&interf).map(|(a, i)| C64::new(*a, i * s)).collect();
    Ok(PilotFrame {
        pilots,
        users,
        guard,
        base,
        signs: sylvester(pilots),
        virtual_symbols,
        pilot_power: 2.0 * pd * pilots as f64,
    })
}

/// Runs the preamble of every user through synthesis and analysis over an
/// ideal channel and returns the largest deviation from the predicted virtual
/// training symbols.
pub fn pilot_interference_check(frame: &PilotFrame, bank: &FilterBank) -> Result<f64> {
    let m = frame.base.len();
    let empty = OqamGrid::zeros(m, 0);
    let mut worst: f64 = 0.0;
    for u in 0..frame.users {
        let grid = frame.user_grid(u, &empty);
        let slots = grid.num_half_symbols();
        let y = bank.analyze(&bank.synthesize(&grid)?, slots)?;
        for i in 0..frame.pilots {
            for mm in 0..m {
                let want = frame.virtual_symbols[mm] * frame.signs[i][u];
                worst = worst.max((y[frame.pilot_slot(i)][mm] - want).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram;
    use crate::waveform::{build_iota, xi_table};

    fn coupling(m: usize) -> (FilterBank, PilotCoupling) {
        let bank = FilterBank::new(build_iota(m, 4).unwrap());
        let xi = xi_table(&bank, 4);
        let c = PilotCoupling::new(&bank, &xi);
        (bank, c)
    }

    #[test]
    fn two_by_two_signs() {
        assert_eq!(sylvester(2), vec![vec![1.0, 1.0], vec![1.0, -1.0]]);
    }

    #[test]
    fn training_matrix_is_orthogonal() {
        let (_, c) = coupling(64);
        for seed in 0..20 {
            let mut s = RngStream::new(seed, 0);
            let f = build_pilots(8, 6, 0.7, &c, &mut s).unwrap();
            for m in [0, 5, 31, 63] {
                let g = gram(&f.training_matrix(m));
                for i in 0..6 {
                    for j in 0..6 {
                        if i == j {
                            assert!((g[(i, i)].re / f.pilot_power - 1.0).abs() < 1e-10);
                        } else {
                            assert!(g[(i, j)].norm() <= 1e-12 * f.pilot_power);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_dimensions() {
        let (_, c) = coupling(64);
        let mut s = RngStream::new(1, 0);
        assert!(build_pilots(4, 5, 1.0, &c, &mut s).is_err());
        assert!(build_pilots(6, 4, 1.0, &c, &mut s).is_err());
    }

    #[test]
    fn guard_slots_are_zero() {
        let (_, c) = coupling(64);
        let f = build_pilots(4, 4, 1.0, &c, &mut RngStream::new(2, 0)).unwrap();
        let g = f.user_grid(1, &OqamGrid::zeros(64, 3));
        for i in 0..4 {
            assert!(g.column(2 * i + 1).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn full_chain_matches_prediction() {
        // An isolated pilot instant sees only same-instant interference.
        let (bank, c) = coupling(64);
        let pd = 1.0;
        let f = build_pilots(1, 1, pd, &c, &mut RngStream::new(3, 0)).unwrap();
        let dev = pilot_interference_check(&f, &bank).unwrap();
        assert!(dev <= 1e-2 * (2.0 * pd).sqrt(), "{dev}");

        let g = build_pilots_with_guard(2, 1, pd, 0, &c, &mut RngStream::new(3, 0)).unwrap();
        let h = build_pilots_with_guard(2, 1, pd, 1, &c, &mut RngStream::new(3, 0)).unwrap();
        let dev0 = pilot_interference_check(&g, &bank).unwrap();
        let dev1 = pilot_interference_check(&h, &bank).unwrap();
        assert!(dev0 > dev1, "{dev0} vs {dev1}");
    }

    #[test]
    fn residual_is_leakage_from_neighbouring_pilots() {
        // With one guard zero the pilots two half-symbols away still leak
        // through ξ at Δk = ±2, |Δm| = 1 (about 0.04 each). Adding those terms
        // to the prediction closes the gap.
        let (bank, c) = coupling(64);
        let f = build_pilots(4, 4, 1.0, &c, &mut RngStream::new(3, 0)).unwrap();
        let m = 64;
        let empty = OqamGrid::zeros(m, 0);
        let mut worst_same: f64 = 0.0;
        let mut worst_full: f64 = 0.0;
        for u in 0..4 {
            let grid = f.user_grid(u, &empty);
            let y = bank.analyze(&bank.synthesize(&grid).unwrap(), grid.num_half_symbols()).unwrap();
            for i in 1..3 {
                let k = f.pilot_slot(i);
                for mm in [7usize, 20, 41] {
                    let same = f.virtual_symbols[mm] * f.signs[i][u];
                    let mut leak = C64::new(0.0, 0.0);
                    for kk in [k - 2, k + 2] {
                        for dm in -3i64..=3 {
                            let m2 = (mm as i64 + dm) as usize;
                            leak += crate::waveform::xi_direct(&bank, m2, kk, mm, k) * grid.get(m2, kk);
                        }
                    }
                    worst_same = worst_same.max((y[k][mm] - same).norm());
                    worst_full = worst_full.max((y[k][mm] - same - leak).norm());
                }
            }
        }
        assert!(worst_same > 2e-2, "{worst_same}");
        assert!(worst_full <= 1e-2 * 2f64.sqrt(), "{worst_full}");
    }

    #[test]
    fn zero_pilots_zero_deviation() {
        let (bank, c) = coupling(64);
        let mut f = build_pilots(4, 4, 1.0, &c, &mut RngStream::new(4, 0)).unwrap();
        f.base.iter_mut().for_each(|v| *v = 0.0);
        f.virtual_symbols.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        assert_eq!(pilot_interference_check(&f, &bank).unwrap(), 0.0);
    }
}
