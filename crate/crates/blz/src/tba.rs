//! Massless TBA for the minimal models M(2, 2n+3) on the folded A_2n diagram.
//!
//! Labels j = 1/2, 1, …, n cover the unfolded chain; the fold j ↔ n+1/2-j
//! leaves the n independent nodes j = 1/2, …, n/2, which are the ones solved for.

use crate::error::{Error, Result};
use crate::kernels::kernel_phi_minimal;
use crate::numerics::{quad, FftConvolver, RapidityGrid, C64};
use crate::params::{asymptotic_constants, ParamSet};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TbaSystem {
    pub n: usize,
    pub beta2: f64,
    pub xi: f64,
    /// m_j for j = 1/2, 1, …, n.
    pub masses: Vec<f64>,
    /// Folded incidence among the independent nodes (the last node carries a loop).
    pub incidence: Vec<Vec<u8>>,
    pub r_scale: f64,
}

pub fn build_system(n: usize, r_scale: f64) -> Result<TbaSystem> {
    if n == 0 {
        return Err(Error::Usage("TBA needs n ≥ 1".into()));
    }
    if !(r_scale > 0.0) {
        return Err(Error::Domain(format!("r_scale = {r_scale} must be positive")));
    }
    let beta2 = 2.0 / (2 * n + 3) as f64;
    let ps = ParamSet::derive(beta2, 0.0, 1.0, 1.0)?;
    let xi = ps.xi;
    let m = asymptotic_constants(&ps, 0)?.m;
    let masses =
        (1..=2 * n).map(|tj| 2.0 * m / PI / (PI * xi / 2.0).tan() * (PI * tj as f64 * xi / 2.0).sin()).collect();
    let mut incidence = vec![vec![0u8; n]; n];
    for i in 0..n {
        if i + 1 < n {
            incidence[i][i + 1] = 1;
            incidence[i + 1][i] = 1;
        }
    }
    incidence[n - 1][n - 1] = 1;
    Ok(TbaSystem { n, beta2, xi, masses, incidence, r_scale })
}

impl TbaSystem {
    /// Independent labels 1/2, 1, …, n/2.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|tj| tj as f64 / 2.0).collect()
    }

    pub fn mass(&self, j: f64) -> f64 {
        self.masses[(2.0 * j).round() as usize - 1]
    }

    /// Index of the independent node carrying label j.
    pub fn fold(&self, j: f64) -> usize {
        let tj = (2.0 * j).round() as usize;
        let t = if tj > self.n { 2 * self.n + 1 - tj } else { tj };
        t - 1
    }

    /// N_jj' = ∫ φ_jj' dθ/2π over the independent nodes.
    pub fn plateau_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let nodes = self.nodes();
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (a, &j) in nodes.iter().enumerate() {
            for (b, &jp) in nodes.iter().enumerate() {
                kernel_phi_minimal(j, jp, 0.0, self.xi)?;
                let f = |t: f64| kernel_phi_minimal(j, jp, t, self.xi).unwrap();
                out[a][b] = quad::integrate_panels(f, -60.0, 60.0, 0.25, 1e-13) / (2.0 * PI);
            }
        }
        Ok(out)
    }
}

/// Positive solution of Y_j² = (1 + Y_{j-1/2})(1 + Y_{j+1/2}), Y_0 = 0, under the fold.
pub fn stationary_y(sys: &TbaSystem) -> Vec<f64> {
    let n = sys.n;
    let mut y = vec![1.0f64; n];
    for _ in 0..10_000 {
        let old = y.clone();
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { old[i - 1] };
            let right = if i + 1 < n { old[i + 1] } else { old[n - 1] };
            let target = ((1.0 + left) * (1.0 + right)).sqrt();
            y[i] = 0.5 * old[i] + 0.5 * target;
        }
        if y.iter().zip(&old).all(|(a, b)| (a - b).abs() < 1e-15 * a) {
            break;
        }
    }
    y
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TbaSolution {
    pub system: TbaSystem,
    pub grid: RapidityGrid,
    /// ε_j on the grid, one row per independent node.
    pub epsilon: Vec<Vec<f64>>,
    pub iterations: usize,
    pub defect: f64,
}

impl TbaSolution {
    /// ε for any label j = 1/2..n through the fold.
    pub fn epsilon_label(&self, j: f64) -> &[f64] {
        &self.epsilon[self.system.fold(j)]
    }

    pub fn left_plateau(&self) -> Vec<f64> {
        self.epsilon.iter().map(|e| e[0]).collect()
    }

    pub fn to_csv(&self, node: usize) -> String {
        let mut s = String::from("theta,epsilon,L\n");
        for (x, e) in self.grid.nodes().iter().zip(&self.epsilon[node]) {
            let _ = writeln!(s, "{x:.17e},{e:.17e},{:.17e}", ell(*e));
        }
        s
    }
}

fn ell(e: f64) -> f64 {
    (-e).exp().ln_1p()
}

/// Left edge at -22, right edge at 14 or where π m_min r e^θ = 40 if later.
pub fn default_grid(sys: &TbaSystem) -> Result<RapidityGrid> {
    let m_min = sys.nodes().iter().map(|&j| sys.mass(j)).fold(f64::INFINITY, f64::min);
    // kernel tails fall like e^{-θ}; keep going well past where L has died
    let right = (40.0 / (PI * m_min * sys.r_scale)).ln().max(14.0);
    let left = (-22.0f64).min(right - 10.0);
    let n = ((right - left) / 0.02).ceil() as usize + 1;
    RapidityGrid::new(left, right, n)
}

#[derive(Debug, Clone, Copy)]
pub struct TbaConfig {
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
}

impl Default for TbaConfig {
    fn default() -> Self {
        Self { tol: 1e-12, damping: 0.5, max_iter: 5000 }
    }
}

pub fn solve_tba(sys: &TbaSystem, grid: &RapidityGrid, cfg: &TbaConfig) -> Result<TbaSolution> {
    let n = sys.n;
    let (np, h) = (grid.n_points, grid.spacing());
    let nodes = sys.nodes();
    let xs = grid.nodes();
    let drive: Vec<Vec<f64>> =
        nodes.iter().map(|&j| xs.iter().map(|x| PI * sys.mass(j) * sys.r_scale * x.exp()).collect()).collect();
    if drive.iter().any(|d| d[np - 1] < 30.0) {
        return Err(Error::Domain("right edge too low: driving term below 30".into()));
    }
    // kernel lattices, and tails Σ_{q ≥ i+1} φ(qh) standing in for constant L left of the grid
    let extra = (60.0 / h).ceil() as usize;
    let mut conv = Vec::with_capacity(n * n);
    let mut tails = Vec::with_capacity(n * n);
    for &j in &nodes {
        for &jp in &nodes {
            kernel_phi_minimal(j, jp, 0.0, sys.xi)?;
            let phi = |t: f64| kernel_phi_minimal(j, jp, t, sys.xi).unwrap() / (2.0 * PI);
            conv.push(FftConvolver::from_fn(np, h, |t| C64::new(phi(t), 0.0)));
            let mut tail = vec![0.0; np];
            let mut acc: f64 = (np + 1..np + extra).rev().map(|q| phi(q as f64 * h)).sum();
            for i in (0..np).rev() {
                acc += phi((i + 1) as f64 * h);
                tail[i] = acc;
            }
            tails.push(tail);
        }
    }
    let mut eps = drive.clone();
    let mut defect = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let ls: Vec<Vec<C64>> = eps.iter().map(|e| e.iter().map(|&v| C64::new(ell(v), 0.0)).collect()).collect();
        let mut next = drive.clone();
        for a in 0..n {
            for b in 0..n {
                let c = conv[a * n + b].apply(&ls[b]);
                let l_left = ls[b][0].re;
                // unit weights throughout: an infinite lattice sum with constant L left of the grid
                for i in 0..np {
                    next[a][i] -= h * (c[i].re + l_left * tails[a * n + b][i]);
                }
            }
        }
        defect = 0.0;
        for a in 0..n {
            for i in 0..np {
                let v = (1.0 - cfg.damping) * next[a][i] + cfg.damping * eps[a][i];
                defect = f64::max(defect, (v - eps[a][i]).abs());
                eps[a][i] = v;
            }
        }
        if defect < cfg.tol {
            return Ok(TbaSolution { system: sys.clone(), grid: grid.clone(), epsilon: eps, iterations: it, defect });
        }
    }
    Err(Error::Convergence { iterations: cfg.max_iter, defect })
}
