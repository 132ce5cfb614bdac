//! Pilot preamble construction and LMMSE channel estimation, single-cell and
//! with pilot contamination.

mod pilots;

pub use pilots::{
    build_pilots, build_pilots_with_guard, pilot_interference_check, sylvester, PilotCoupling, PilotFrame,
};

use crate::error::{invalid, Result};
use crate::linalg::{gram, CMat, CVec, C64};
use crate::rng::RngStream;

/// Estimates for the channels seen by one base station.
#[derive(Debug, Clone)]
pub struct EstimateBundle {
    /// ĝ^u as columns (home cell in the multi-cell case).
    pub ghat: CMat,
    /// Per-entry variance of ĝ^u.
    pub est_var: Vec<f64>,
    /// Per-entry variance of e^u = g^u − ĝ^u.
    pub err_var: Vec<f64>,
    pub multicell: Option<MultiCellEstimates>,
}

#[derive(Debug, Clone)]
pub struct MultiCellEstimates {
    pub serving: usize,
    /// γ^u = Σ_{i≠n} β^u_{n,i} + 1.
    pub gamma: Vec<f64>,
    /// ĝ_{n,i} = β^u_{n,i}·ĝ_{n,n} per cell i (the serving cell's entry is ĝ itself).
    pub cross: Vec<CMat>,
    /// Per-entry estimate and error variances, indexed `[i][u]`.
    pub cross_est_var: Vec<Vec<f64>>,
    pub cross_err_var: Vec<Vec<f64>>,
}

/// Y = Σ_i G_i B^T + W over the pilot instants; returns N×K.
pub fn receive_pilots(channels: &[&CMat], b: &CMat, noise_var: f64, stream: &mut RngStream) -> Result<CMat> {
    let n = channels.first().map_or(0, |g| g.rows());
    let k = b.rows();
    let mut y = CMat::zeros(n, k);
    for g in channels {
        if g.cols() != b.cols() || g.rows() != n {
            return invalid("pilot channels and training matrix disagree in size");
        }
        // G B^T: y[:, i] += Σ_u G[:, u] B[i][u].
        let bt = CMat::from_fn(b.cols(), k, |u, i| b[(i, u)]);
        y = y.add(&g.mul(&bt));
    }
    if noise_var > 0.0 {
        for r in 0..n {
            for c in 0..k {
                y[(r, c)] += stream.cn(noise_var);
            }
        }
    }
    Ok(y)
}

/// Checks B^H B = P_p I and returns P_p.
fn training_power(b: &CMat) -> Result<f64> {
    let g = gram(b);
    let u = g.rows();
    let pp = (0..u).map(|i| g[(i, i)].re).sum::<f64>() / u as f64;
    for i in 0..u {
        for j in 0..u {
            let want = if i == j { pp } else { 0.0 };
            if (g[(i, j)] - want).norm() > 1e-9 * pp {
                return invalid("training matrix is not orthogonal with equal column power");
            }
        }
    }
    Ok(pp)
}

/// y^u = Y·(b^u)*.
fn correlate(y: &CMat, b: &CMat, u: usize) -> CVec {
    let w: CVec = (0..b.rows()).map(|i| b[(i, u)].conj()).collect();
    y.mul_vec(&w)
}

pub fn lmmse_single(y: &CMat, b: &CMat, beta: &[f64], noise_var: f64) -> Result<EstimateBundle> {
    if y.cols() != b.rows() || beta.len() != b.cols() {
        return invalid("lmmse_single: dimensions of Y, B and β disagree");
    }
    let pp = training_power(b)?;
    let users = b.cols();
    let mut ghat = CMat::zeros(y.rows(), users);
    let mut est_var = Vec::with_capacity(users);
    let mut err_var = Vec::with_capacity(users);
    for (u, &bu) in beta.iter().enumerate() {
        let den = pp * bu + noise_var;
        let s = bu / den;
        let yu = correlate(y, b, u);
        ghat.set_col(u, &yu.iter().map(|v| v * s).collect::<CVec>());
        est_var.push(pp * bu * bu / den);
        err_var.push(bu * noise_var / den);
    }
    Ok(EstimateBundle { ghat, est_var, err_var, multicell: None })
}

/// γ^u for serving cell n, `beta[i][u]` = β^u_{n,i}.
pub fn gamma(beta: &[Vec<f64>], serving: usize) -> Vec<f64> {
    let users = beta[serving].len();
    (0..users)
        .map(|u| 1.0 + beta.iter().enumerate().filter(|(i, _)| *i != serving).map(|(_, r)| r[u]).sum::<f64>())
        .collect()
}

pub fn lmmse_multicell(y: &CMat, b: &CMat, beta: &[Vec<f64>], serving: usize, noise_var: f64) -> Result<EstimateBundle> {
    if y.cols() != b.rows() || beta.iter().any(|r| r.len() != b.cols()) || serving >= beta.len() {
        return invalid("lmmse_multicell: dimensions of Y, B and β disagree");
    }
    let pp = training_power(b)?;
    let users = b.cols();
    let gam = gamma(beta, serving);
    let mut ghat = CMat::zeros(y.rows(), users);
    let mut est_var = Vec::with_capacity(users);
    let mut err_var = Vec::with_capacity(users);
    for u in 0..users {
        let den = pp * gam[u] + noise_var;
        let yu = correlate(y, b, u);
        ghat.set_col(u, &yu.iter().map(|v| v / den).collect::<CVec>());
        est_var.push(pp / den);
        err_var.push((pp * (gam[u] - 1.0) + noise_var) / den);
    }
    let cells = beta.len();
    let mut cross = Vec::with_capacity(cells);
    let mut cross_est_var = Vec::with_capacity(cells);
    let mut cross_err_var = Vec::with_capacity(cells);
    for (i, row) in beta.iter().enumerate() {
        if i == serving {
            cross.push(ghat.clone());
            cross_est_var.push(est_var.clone());
            cross_err_var.push(err_var.clone());
            continue;
        }
        let mut c = ghat.clone();
        for u in 0..users {
            let col: CVec = ghat.col(u).iter().map(|v| v * row[u]).collect();
            c.set_col(u, &col);
        }
        cross.push(c);
        cross_est_var.push((0..users).map(|u| pp * row[u] * row[u] / (pp * gam[u] + noise_var)).collect());
        cross_err_var.push(
            (0..users)
                .map(|u| row[u] * (pp * gam[u] - pp * row[u] + noise_var) / (pp * gam[u] + noise_var))
                .collect(),
        );
    }
    Ok(EstimateBundle {
        ghat,
        est_var,
        err_var,
        multicell: Some(MultiCellEstimates { serving, gamma: gam, cross, cross_est_var, cross_err_var }),
    })
}

/// Conditional law of the true channels given the home-cell estimate: for each
/// antenna and user, g_{n,i} = β_i ĝ + e_i with (e_i) jointly Gaussian,
/// Cov(e_i, e_j) = β_i δ_ij − P_p β_i β_j/(P_pγ + σ²). Returns a lower-triangular
/// factor per user (cells × cells, real).
pub fn multicell_error_factor(beta: &[Vec<f64>], serving: usize, pp: f64, noise_var: f64) -> Result<Vec<Vec<Vec<f64>>>> {
    let cells = beta.len();
    let users = beta[serving].len();
    let gam = gamma(beta, serving);
    let mut out = Vec::with_capacity(users);
    for u in 0..users {
        let den = pp * gam[u] + noise_var;
        let cov = |i: usize, j: usize| -> f64 {
            let bi = beta[i][u];
            let bj = beta[j][u];
            (if i == j { bi } else { 0.0 }) - pp * bi * bj / den
        };
        // Cholesky with pivots allowed to vanish (zero-gain cells).
        let mut l = vec![vec![0.0; cells]; cells];
        for j in 0..cells {
            let mut d = cov(j, j);
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if d < -1e-12 {
                return Err(crate::Error::Numeric(format!("error covariance not PSD at pivot {j}")));
            }
            let djj = d.max(0.0).sqrt();
            l[j][j] = djj;
            for i in j + 1..cells {
                let mut s = cov(i, j);
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = if djj > 0.0 { s / djj } else { 0.0 };
            }
        }
        out.push(l);
    }
    Ok(out)
}

/// Draws the true channels of all cells for given estimates (one joint error
/// draw per antenna and user). Returns G_{n,i} per cell i.
pub fn draw_multicell_truth(
    est: &EstimateBundle,
    factor: &[Vec<Vec<f64>>],
    stream: &mut RngStream,
) -> Vec<CMat> {
    let mc = est.multicell.as_ref().expect("multi-cell estimates");
    let cells = mc.cross.len();
    let (n, users) = (est.ghat.rows(), est.ghat.cols());
    let mut out: Vec<CMat> = mc.cross.clone();
    let mut z = vec![C64::new(0.0, 0.0); cells];
    for a in 0..n {
        for u in 0..users {
            for v in z.iter_mut() {
                *v = stream.cn(1.0);
            }
            let l = &factor[u];
            for i in 0..cells {
                let mut e = C64::new(0.0, 0.0);
                for k in 0..=i {
                    e += z[k] * l[i][k];
                }
                out[i][(a, u)] += e;
            }
        }
    }
    out
}
