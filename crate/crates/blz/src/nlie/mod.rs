//! Ground-state non-linear integral equations, massive and conformal.
//!
//! Both variants are solved for the counting function on the line Im θ = -η,
//! where log(1 + e^{-iε}) is smooth and (massive case) decays at both ends.
//! Real-axis values follow from one more convolution with the kernel moved
//! up by iη.

mod conformal;
mod im;
mod reconstruct;
mod zeros;

pub use conformal::{reconstruct_a_conformal, AReconstructor};
pub use im::{extract_im, fit_im_from_q, IntegralsOfMotion};
pub use reconstruct::{closed_form_script_s, compute_script_s, QReconstructor, ScriptS};
pub use zeros::{e_asymptotic, find_zeros, hadamard_q, HadamardQ, ZeroSet};

use crate::error::{Error, Result};
use crate::kernels::{cached_lattice, g_hat, g_hat_shifted, g_rest_int_hat_shifted, tanh_c};
use crate::numerics::{interp_uniform, FftConvolver, RapidityGrid, SampledFunction, C64};
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Massive,
    Conformal,
}

/// Driving term of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    /// offset + r sinh θ
    Sinh { offset: f64, r: f64 },
    /// offset + amplitude e^θ
    Exp { offset: f64, amplitude: f64 },
}

impl Drive {
    pub fn eval(&self, z: C64) -> C64 {
        match *self {
            Drive::Sinh { offset, r } => offset + r * z.sinh(),
            Drive::Exp { offset, amplitude } => offset + amplitude * z.exp(),
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        match *self {
            Drive::Sinh { offset, r } => offset + r * x.sinh(),
            Drive::Exp { offset, amplitude } => offset + amplitude * x.exp(),
        }
    }

    pub fn offset(&self) -> f64 {
        match *self {
            Drive::Sinh { offset, .. } | Drive::Exp { offset, .. } => offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlieConfig {
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
    /// Distance of the solution line below the real axis; defaults to
    /// [`default_eta`].
    pub eta: Option<f64>,
}

impl Default for NlieConfig {
    fn default() -> Self {
        Self { tol: 1e-12, damping: 0.5, max_iter: 400, eta: None }
    }
}

/// 0.2 min(π, π/α): well inside the strip 2η < min(π, π/α) where G(θ - 2iη) exists.
pub fn default_eta(alpha: f64) -> f64 {
    0.2 * PI * (1.0f64).min(1.0 / alpha)
}

pub const DEFAULT_POINTS: usize = 1 << 12;

/// Symmetric grid wide enough for the real-axis tail of the kernel term to
/// fall below 1e-6 and for zeros up to |n| = n_max to be interior.
pub fn default_grid_massive(ps: &ParamSet, n_max: usize) -> Result<RapidityGrid> {
    let eta = default_eta(ps.alpha);
    let r = ps.r.max(1e-300);
    let support = (60.0 / (r * eta.sin())).asinh();
    let zeros = (2.0 * PI * (2 * n_max + 2) as f64 / r).asinh() + 2.0;
    let edge = (support + 15.0).max(zeros).max(20.0);
    RapidityGrid::symmetric(edge, DEFAULT_POINTS)
}

/// Grid for the conformal equation: the left end sits on the plateau.
pub fn default_grid_conformal(ps: &ParamSet) -> Result<RapidityGrid> {
    let amp = conformal_amplitude(ps)?;
    let eta = default_eta(ps.alpha);
    let right = (60.0 / (amp * eta.sin())).ln().max(0.0) + 15.0;
    RapidityGrid::new(-30.0, right.max(20.0), DEFAULT_POINTS)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NlieSolution {
    pub params: ParamSet,
    pub grid: RapidityGrid,
    /// Real-axis counting function.
    pub epsilon: SampledFunction,
    pub variant: Variant,
    pub iterations: usize,
    pub residual: f64,
    pub sub_axis_delta: f64,
    pub drive: Drive,
    /// ε(θ - iη) on the grid.
    #[serde(skip)]
    pub shifted: Vec<C64>,
    /// log(1 + e^{-iε(θ - iη)}) on the grid, phase continuous from the right end.
    #[serde(skip)]
    pub ell: Vec<C64>,
}

impl NlieSolution {
    /// Real-axis ε at any θ inside the grid (driving term plus interpolated remainder).
    pub fn epsilon_at(&self, theta: f64) -> f64 {
        let rem: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.epsilon.values)
            .map(|(&x, e)| e.re - self.drive.eval_real(x))
            .collect();
        self.drive.eval_real(theta) + interp_uniform(&rem, self.grid.theta_min, self.grid.spacing(), theta, 10)
    }

    /// ε(θ) minus the driving term on the grid.
    pub fn remainder(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.epsilon.values)
            .map(|(&x, e)| e.re - self.drive.eval_real(x))
            .collect()
    }

    /// log(1 + e^{-iε}) evaluated at the left end, the plateau value (zero for the massive case).
    pub fn left_plateau(&self) -> C64 {
        match self.variant {
            Variant::Massive => C64::new(0.0, 0.0),
            Variant::Conformal => self.ell[0],
        }
    }

    pub fn eta(&self) -> f64 {
        self.sub_axis_delta
    }
}

/// Convolution against a G lattice on the grid, with an optional constant
/// continuation of f to the left of the grid.
struct ShiftedG {
    conv: FftConvolver,
    /// ∫_{x_i - x_0}^∞ G(u + iY) du for each node i.
    tail: Vec<C64>,
    h: f64,
}

impl ShiftedG {
    fn new(alpha: f64, n: usize, h: f64, shift: f64, with_tail: bool) -> Self {
        let lat = cached_lattice("g", alpha, shift, n, h, |nu| C64::new(g_hat_shifted(nu, alpha, shift), 0.0));
        let conv = FftConvolver::new(&lat, n - 1, n);
        let tail = if with_tail {
            let g0 = g_hat(0.0, alpha);
            let rest = cached_lattice("g_rest_int", alpha, shift, n, h, |nu| g_rest_int_hat_shifted(nu, alpha, shift));
            // Euler-Maclaurin end corrections where the trapezoid sum meets the exact tail
            let d1 = cached_lattice("g_d1", alpha, shift, n, h, |nu| C64::new(0.0, nu * g_hat_shifted(nu, alpha, shift)));
            let d3 = cached_lattice("g_d3", alpha, shift, n, h, |nu| C64::new(0.0, -nu.powi(3) * g_hat_shifted(nu, alpha, shift)));
            (0..n)
                .map(|i| {
                    let t = C64::new(i as f64 * h, shift);
                    // ∫_t^∞ G = Ĝ(0)(1 - tanh t)/2 - ∫_{-∞}^t G_rest
                    let exact = 0.5 * g0 * (1.0 - tanh_c(t)) - rest[n - 1 + i];
                    exact - h * h / 12.0 * d1[n - 1 + i] + h.powi(4) / 720.0 * d3[n - 1 + i]
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { conv, tail, h }
    }

    fn apply(&self, f: &[C64], left: C64) -> Vec<C64> {
        let n = f.len();
        let mut w = f.to_vec();
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        let mut out = self.conv.apply(&w);
        for (i, o) in out.iter_mut().enumerate() {
            *o *= self.h;
            if !self.tail.is_empty() {
                *o += left * self.tail[i];
            }
        }
        out
    }
}

/// log(1 + e^{-ie}) with the imaginary part continued from the right end.
pub(crate) fn ell_of(e: &[C64]) -> Result<Vec<C64>> {
    let n = e.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut prev_im = 0.0;
    for i in (0..n).rev() {
        let z = C64::new(0.0, -1.0) * e[i];
        let mut v = if z.re > 30.0 { z + (-z).exp().ln_1p_safe() } else { z.exp().ln_1p_safe() };
        if i + 1 < n {
            let k = ((prev_im - v.im) / (2.0 * PI)).round();
            v.im += 2.0 * PI * k;
            if z.re > -2.0 && (e[i].re - e[i + 1].re).abs() > PI {
                return Err(Error::Resolution(format!(
                    "phase of 1+e^(-iε) advances by {:.3} between adjacent nodes",
                    (e[i].re - e[i + 1].re).abs()
                )));
            }
        }
        prev_im = v.im;
        out[i] = v;
    }
    Ok(out)
}

trait Ln1pSafe {
    fn ln_1p_safe(self) -> C64;
}

impl Ln1pSafe for C64 {
    fn ln_1p_safe(self) -> C64 {
        if self.norm() < 1e-8 {
            self - self * self / 2.0
        } else {
            (1.0 + self).ln()
        }
    }
}

fn check_eta(alpha: f64, eta: f64) -> Result<()> {
    let bound = 0.5 * PI * (1.0f64).min(1.0 / alpha);
    if !(eta > 0.0 && eta < bound) {
        return Err(Error::Domain(format!("sub-axis offset {eta} outside (0, {bound})")));
    }
    Ok(())
}

fn solve(ps: &ParamSet, grid: &RapidityGrid, cfg: &NlieConfig, drive: Drive, variant: Variant) -> Result<NlieSolution> {
    if cfg.tol < 1e-12 {
        return Err(Error::Domain(format!("tolerance {} below 1e-12", cfg.tol)));
    }
    let alpha = ps.alpha;
    let eta = cfg.eta.unwrap_or_else(|| default_eta(alpha));
    check_eta(alpha, eta)?;
    let n = grid.n_points;
    let h = grid.spacing();
    let nodes = grid.nodes();
    let plateau = variant == Variant::Conformal;
    let direct = ShiftedG::new(alpha, n, h, 0.0, plateau);
    let mirror = ShiftedG::new(alpha, n, h, -2.0 * eta, plateau);
    let drive_s: Vec<C64> = nodes.iter().map(|&x| drive.eval(C64::new(x, -eta))).collect();

    // iterate on the correction u = e - drive; the drive alone reaches ~1e8 at the edges
    let update = |u: &[C64]| -> Result<Vec<C64>> {
        let e: Vec<C64> = (0..n).map(|i| drive_s[i] + u[i]).collect();
        let ell = ell_of(&e)?;
        let conj: Vec<C64> = ell.iter().map(|v| v.conj()).collect();
        let left = if plateau { ell[0] } else { C64::new(0.0, 0.0) };
        let a = direct.apply(&ell, left);
        let b = mirror.apply(&conj, left.conj());
        Ok((0..n).map(|i| C64::i() * (a[i] - b[i])).collect())
    };

    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut defect = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let next = update(&u)?;
        defect = next.iter().zip(&u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if !defect.is_finite() {
            return Err(Error::Convergence { iterations, defect });
        }
        if defect < cfg.tol {
            u = next;
            break;
        }
        for (x, y) in u.iter_mut().zip(&next) {
            *x += cfg.damping * (y - *x);
        }
    }
    if defect >= cfg.tol {
        return Err(Error::Convergence { iterations, defect });
    }
    let e: Vec<C64> = (0..n).map(|i| drive_s[i] + u[i]).collect();
    let ell = ell_of(&e)?;
    let left = if plateau { ell[0] } else { C64::new(0.0, 0.0) };
    let real = ShiftedG::new(alpha, n, h, eta, plateau);
    let c = real.apply(&ell, left);
    let eps: Vec<C64> = (0..n).map(|i| C64::new(drive.eval_real(nodes[i]) - 2.0 * c[i].im, 0.0)).collect();
    Ok(NlieSolution {
        params: ps.clone(),
        grid: grid.clone(),
        epsilon: SampledFunction::new(grid.clone(), eps, 0.0)?,
        variant,
        iterations,
        residual: defect,
        sub_axis_delta: eta,
        drive,
        shifted: e,
        ell,
    })
}

/// ε(θ) = -2πk + r sinh θ - 2∫ G(θ-θ') Im log(1 + e^{-iε(θ'-i0)}) dθ'.
pub fn solve_nlie_massive(ps: &ParamSet, grid: &RapidityGrid, cfg: &NlieConfig) -> Result<NlieSolution> {
    let lo = ps.r * grid.theta_min.sinh();
    let hi = ps.r * grid.theta_max.sinh();
    if lo > -30.0 || hi < 30.0 {
        return Err(Error::Coverage(format!(
            "driving term r sinh θ spans [{lo:.3}, {hi:.3}] on the grid, need beyond ±30"
        )));
    }
    let drive = Drive::Sinh { offset: -2.0 * PI * ps.k, r: ps.r };
    solve(ps, grid, cfg, drive, Variant::Massive)
}

fn conformal_amplitude(ps: &ParamSet) -> Result<f64> {
    let m = ps
        .big_m_coef
        .ok_or_else(|| Error::Domain(format!("coefficient M undefined at xi = {}", ps.xi)))?;
    Ok(2.0 * m * (0.5 * PI * ps.xi).cos())
}

/// i log 𝔞(θ) = -2πp/β² + 2M cos(πξ/2) e^θ - 2 G ⋆ Im log(1 + 𝔞(θ - i0)).
pub fn solve_nlie_conformal(ps: &ParamSet, grid: &RapidityGrid, cfg: &NlieConfig) -> Result<NlieSolution> {
    if 2.0 * ps.p <= -ps.beta2 {
        return Err(Error::Domain(format!("2p = {} ≤ -β²: special zeros present", 2.0 * ps.p)));
    }
    let amplitude = conformal_amplitude(ps)?;
    if amplitude * grid.theta_max.exp() < 30.0 {
        return Err(Error::Coverage("grid right edge does not reach driving dominance".into()));
    }
    let drive = Drive::Exp { offset: -2.0 * PI * ps.p / ps.beta2, amplitude };
    solve(ps, grid, cfg, drive, Variant::Conformal)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn massive(alpha: f64, k: f64, r: f64) -> NlieSolution {
        let ps = ParamSet::from_alpha(alpha, k, r).unwrap();
        let grid = default_grid_massive(&ps, 10).unwrap();
        solve_nlie_massive(&ps, &grid, &NlieConfig::default()).unwrap()
    }

    #[test]
    fn free_fermion_is_driving_term() {
        let sol = massive(1.0, 0.2, 1.5);
        assert!(sol.residual < 1e-12);
        for (x, e) in sol.grid.nodes().iter().zip(&sol.epsilon.values) {
            let d = -2.0 * PI * 0.2 + 1.5 * x.sinh();
            assert!((e.re - d).abs() <= 1e-12 * d.abs().max(1.0));
        }
    }

    #[test]
    fn odd_at_zero_momentum() {
        let sol = massive(2.0, 0.0, 1.0);
        let v = &sol.epsilon.values;
        let n = v.len();
        let worst = (0..n)
            .map(|i| (v[i].re + v[n - 1 - i].re).abs() / v[i].re.abs().max(1.0))
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn branch_normalization_at_edge() {
        let sol = massive(2.0, 0.1, 1.0);
        // ε - r sinh θ → -2πk, so the remainder past the offset decays
        for (x, v) in sol.grid.nodes().iter().zip(sol.remainder()) {
            if *x > 16.0 {
                assert!(v.abs() < 1e-6, "{x} {v}");
            }
        }
        assert_eq!(sol.drive.offset(), -2.0 * PI * 0.1);
    }

    #[test]
    fn resolution_independent() {
        let ps = ParamSet::from_alpha(2.0, 0.1, 1.0).unwrap();
        let cfg = NlieConfig::default();
        let a = solve_nlie_massive(&ps, &RapidityGrid::symmetric(20.0, 1 << 11).unwrap(), &cfg).unwrap();
        let b = solve_nlie_massive(&ps, &RapidityGrid::symmetric(20.0, 1 << 12).unwrap(), &cfg).unwrap();
        let (ea, eb) = (a.epsilon_at(0.0), b.epsilon_at(0.0));
        assert!((ea - eb).abs() < 1e-8, "{ea} {eb}");
        // regression value
        assert!((eb - (-0.489_988_796_827)).abs() < 1e-9, "{eb:.12}");
    }

    #[test]
    fn offset_halving_invariant() {
        let ps = ParamSet::from_alpha(2.0, 0.1, 1.0).unwrap();
        let grid = default_grid_massive(&ps, 10).unwrap();
        let eta = default_eta(2.0);
        let a = solve_nlie_massive(&ps, &grid, &NlieConfig { eta: Some(eta), ..Default::default() }).unwrap();
        let b = solve_nlie_massive(&ps, &grid, &NlieConfig { eta: Some(eta / 2.0), ..Default::default() }).unwrap();
        let worst = a
            .remainder()
            .iter()
            .zip(b.remainder())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let ps = ParamSet::from_alpha(2.0, 0.1, 1.0).unwrap();
        let narrow = RapidityGrid::symmetric(3.0, 256).unwrap();
        assert!(matches!(solve_nlie_massive(&ps, &narrow, &NlieConfig::default()), Err(Error::Coverage(_))));
    }

    #[test]
    fn conformal_first_iterate_and_edge() {
        let ps = ParamSet::conformal(0.3, 0.2).unwrap();
        let grid = default_grid_conformal(&ps).unwrap();
        let one = NlieConfig { max_iter: 1, tol: 1e-12, ..Default::default() };
        // a single sweep starts from the driving term; the defect it reports is
        // the size of the first correction
        assert!(matches!(solve_nlie_conformal(&ps, &grid, &one), Err(Error::Convergence { iterations: 1, .. })));
        let sol = solve_nlie_conformal(&ps, &grid, &NlieConfig::default()).unwrap();
        assert!((sol.drive.offset() + 2.0 * PI * ps.p / ps.beta2).abs() < 1e-14);
        for (x, v) in sol.grid.nodes().iter().zip(sol.remainder()) {
            if *x > sol.grid.theta_max - 4.0 {
                assert!(v.abs() < 1e-5, "{x} {v}");
            }
        }
    }
}
