//! Hexagonal multi-cell geometry with path loss and log-normal shadowing.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCellConfig {
    pub cells: usize,
    pub users: usize,
    pub radius: f64,
    pub inner_radius: f64,
    pub pathloss_exp: f64,
    pub shadowing_db: f64,
}

impl Default for MultiCellConfig {
    fn default() -> Self {
        MultiCellConfig { cells: 7, users: 8, radius: 1000.0, inner_radius: 100.0, pathloss_exp: 3.8, shadowing_db: 8.0 }
    }
}

/// Large-scale tensor `beta[n][i][u]` = β^u_{n,i}: gain from user u of cell i
/// to base station n, normalized so that β^u_{n,n} = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCellScene {
    pub config: MultiCellConfig,
    pub bs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<Vec<[f64; 2]>>,
    pub beta: Vec<Vec<Vec<f64>>>,
}

impl MultiCellScene {
    /// A scene with every cross-cell coefficient equal to `cross`.
    pub fn uniform(cells: usize, users: usize, cross: f64) -> Result<Self> {
        if cross < 0.0 || cells == 0 {
            return invalid("uniform scene needs cells ≥ 1 and a non-negative cross gain");
        }
        let beta = (0..cells)
            .map(|n| (0..cells).map(|i| vec![if i == n { 1.0 } else { cross }; users]).collect())
            .collect();
        Ok(MultiCellScene {
            config: MultiCellConfig { cells, users, ..MultiCellConfig::default() },
            bs_positions: Vec::new(),
            user_positions: Vec::new(),
            beta,
        })
    }

    pub fn cells(&self) -> usize {
        self.beta.len()
    }

    pub fn users(&self) -> usize {
        self.beta.first().and_then(|r| r.first()).map_or(0, |r| r.len())
    }

    /// β^u_{n,i} for fixed serving base station n, indexed `[i][u]`.
    pub fn serving(&self, n: usize) -> &[Vec<f64>] {
        &self.beta[n]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("scene file: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn hex_ring(cells: usize, radius: f64) -> Vec<[f64; 2]> {
    let d = 3f64.sqrt() * radius;
    let mut out = vec![[0.0, 0.0]];
    for i in 0..cells.saturating_sub(1) {
        let a = PI / 6.0 + i as f64 * PI / 3.0;
        out.push([d * a.cos(), d * a.sin()]);
    }
    out
}

pub fn gen_multicell(stream: &mut RngStream, cfg: &MultiCellConfig) -> Result<MultiCellScene> {
    if !(cfg.radius > cfg.inner_radius && cfg.inner_radius > 0.0) {
        return invalid(format!("need radius > inner radius > 0, got {} and {}", cfg.radius, cfg.inner_radius));
    }
    if cfg.cells == 0 || cfg.cells > 7 {
        return invalid(format!("the hexagonal layout supports 1 to 7 cells, got {}", cfg.cells));
    }
    let bs = hex_ring(cfg.cells, cfg.radius);
    let (r2lo, r2hi) = (cfg.inner_radius.powi(2), cfg.radius.powi(2));
    let users: Vec<Vec<[f64; 2]>> = bs
        .iter()
        .map(|c| {
            (0..cfg.users)
                .map(|_| {
                    // Uniform over the annulus area.
                    let r = (r2lo + stream.uniform() * (r2hi - r2lo)).sqrt();
                    let a = 2.0 * PI * stream.uniform();
                    [c[0] + r * a.cos(), c[1] + r * a.sin()]
                })
                .collect()
        })
        .collect();
    let mut beta = vec![vec![vec![0.0; cfg.users]; cfg.cells]; cfg.cells];
    for n in 0..cfg.cells {
        for i in 0..cfg.cells {
            for u in 0..cfg.users {
                beta[n][i][u] = if i == n {
                    1.0
                } else {
                    let p = users[i][u];
                    let dist = ((p[0] - bs[n][0]).powi(2) + (p[1] - bs[n][1]).powi(2)).sqrt();
                    let z = 10f64.powf(cfg.shadowing_db * stream.normal() / 10.0);
                    z / (dist / cfg.inner_radius).powf(cfg.pathloss_exp)
                };
            }
        }
    }
    Ok(MultiCellScene { config: cfg.clone(), bs_positions: bs, user_positions: users, beta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn home_gains_are_one_and_cross_gains_small() {
        let mut s = RngStream::new(1, 0);
        let scene = gen_multicell(&mut s, &MultiCellConfig::default()).unwrap();
        for n in 0..7 {
            for i in 0..7 {
                for u in 0..8 {
                    let b = scene.beta[n][i][u];
                    if i == n {
                        assert_eq!(b, 1.0);
                    } else {
                        assert!(b >= 0.0);
                    }
                }
            }
        }
        for (c, us) in scene.bs_positions.iter().zip(&scene.user_positions) {
            for p in us {
                let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                assert!((100.0..=1000.0).contains(&d));
            }
        }
    }

    #[test]
    fn reference_distance_gives_unit_gain() {
        // At r = r_h with z = 1 the formula reduces to 1.
        let cfg = MultiCellConfig::default();
        let z: f64 = 1.0;
        assert_eq!(z / (cfg.inner_radius / cfg.inner_radius).powf(cfg.pathloss_exp), 1.0);
    }

    #[test]
    fn shadowing_moments() {
        // Recover 10·log10 z from β and the known geometry.
        let mut s = RngStream::new(2, 0);
        let cfg = MultiCellConfig { cells: 2, users: 1000, ..MultiCellConfig::default() };
        let mut samples = Vec::new();
        while samples.len() < 100_000 {
            let scene = gen_multicell(&mut s, &cfg).unwrap();
            for n in 0..2 {
                let i = 1 - n;
                for u in 0..cfg.users {
                    let p = scene.user_positions[i][u];
                    let c = scene.bs_positions[n];
                    let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                    let z = scene.beta[n][i][u] * (d / cfg.inner_radius).powf(cfg.pathloss_exp);
                    samples.push(10.0 * z.log10());
                }
            }
        }
        let m = crate::stats::Moments::from_slice(&samples);
        assert!(m.mean().abs() < 0.1, "{}", m.mean());
        let sd = m.variance().sqrt();
        assert!((7.6..=8.4).contains(&sd), "{sd}");
    }

    #[test]
    fn json_round_trip_and_geometry_errors() {
        let mut s = RngStream::new(3, 0);
        let scene = gen_multicell(&mut s, &MultiCellConfig::default()).unwrap();
        assert_eq!(MultiCellScene::from_json(&scene.to_json()).unwrap(), scene);
        let bad = MultiCellConfig { inner_radius: 2000.0, ..MultiCellConfig::default() };
        assert!(gen_multicell(&mut s, &bad).is_err());
    }

    #[test]
    fn reproducible_from_seed() {
        let a = gen_multicell(&mut RngStream::new(4, 9), &MultiCellConfig::default()).unwrap();
        let b = gen_multicell(&mut RngStream::new(4, 9), &MultiCellConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
