use super::reconstruct::f_lattice;
use super::{NlieSolution, Variant};
use crate::error::{Error, Result};
use crate::kernels::{f_rest_int_hat_shifted, fourier_lattice, ln_2cosh_c, tanh_c};
use crate::numerics::{interp_uniform, FftConvolver, C64};
use std::f64::consts::PI;

/// A(λ) on the negative λ² axis from a conformal solution, with θ = (1+ξ)/2 log(-λ²).
///
/// log A(θ) = M e^θ - 2i ∫ F(θ-θ') Im log(1+𝔞(θ'-i0)) dθ' with the left plateau
/// c_L of the integrand removed through χ = (1 - tanh)/2 and put back as
/// -2i c_L ∫ P(θ-θ') χ'(θ') dθ', P(u) = ∫_{-∞}^u F. This drops the power-law
/// prefactor, so log A → 0 as λ² → 0.
pub struct AReconstructor<'a> {
    sol: &'a NlieSolution,
    amplitude: f64,
    /// log A - M e^θ on the grid.
    line: Vec<f64>,
}

impl<'a> AReconstructor<'a> {
    pub fn new(sol: &'a NlieSolution) -> Result<Self> {
        if sol.variant != Variant::Conformal {
            return Err(Error::Usage("A(λ) needs a conformal solution".into()));
        }
        let ps = &sol.params;
        let amplitude = ps
            .big_m_coef
            .ok_or_else(|| Error::Domain(format!("coefficient M undefined at xi = {}", ps.xi)))?;
        let g = &sol.grid;
        let (n, h) = (g.n_points, g.spacing());
        let alpha = ps.alpha;
        let eta = sol.eta();
        let nodes = g.nodes();
        let left = sol.ell[0];
        let c_left = left.im;
        let m: Vec<C64> = (0..n)
            .map(|j| sol.ell[j] - left * 0.5 * (1.0 - tanh_c(C64::new(nodes[j], -eta))))
            .collect();
        let conj: Vec<C64> = m.iter().map(|v| v.conj()).collect();
        let w = |v: &mut Vec<C64>| {
            v[0] *= 0.5;
            v[n - 1] *= 0.5;
        };
        let (mut m_w, mut conj_w) = (m, conj);
        w(&mut m_w);
        w(&mut conj_w);
        let f_const = alpha / (4.0 * PI);
        let up = FftConvolver::new(&f_lattice(alpha, n, h, eta, f_const), n - 1, n).apply(&m_w);
        let down = FftConvolver::new(&f_lattice(alpha, n, h, -eta, f_const), n - 1, n).apply(&conj_w);

        let a = alpha / (alpha + 1.0);
        let rest = fourier_lattice(|nu| f_rest_int_hat_shifted(nu, alpha, 0.0), n, h);
        let amp = C64::new(0.0, alpha / (4.0 * PI));
        let p_lat: Vec<C64> = rest
            .iter()
            .enumerate()
            .map(|(q, r)| {
                let u = C64::new((q as f64 - (n - 1) as f64) * h, 0.0);
                amp * (u + ln_2cosh_c(a * u) / a) + r
            })
            .collect();
        let mut chi_d: Vec<C64> = nodes.iter().map(|&x| C64::new(-0.5 / x.cosh().powi(2), 0.0)).collect();
        w(&mut chi_d);
        let lam = FftConvolver::new(&p_lat, n - 1, n).apply(&chi_d);
        let line = (0..n)
            .map(|i| (h * (down[i] - up[i]) - C64::new(0.0, 2.0 * c_left) * h * lam[i]).re)
            .collect();
        Ok(Self { sol, amplitude, line })
    }

    /// log A as a function of θ; below the grid the e^θ-suppressed remainder is dropped.
    pub fn log_a_theta(&self, theta: f64) -> Result<f64> {
        let g = &self.sol.grid;
        let pad = 12.0 * g.spacing();
        if theta > g.theta_max - pad {
            return Err(Error::Domain(format!("θ = {theta} beyond the grid")));
        }
        if theta < g.theta_min + pad {
            return Ok(self.amplitude * theta.exp());
        }
        Ok(self.amplitude * theta.exp() + interp_uniform(&self.line, g.theta_min, g.spacing(), theta, 10))
    }

    pub fn log_a(&self, lambda2: f64) -> Result<f64> {
        if lambda2 > 0.0 {
            return Err(Error::Domain(format!("λ² = {lambda2} is not on the negative axis")));
        }
        if lambda2 == 0.0 {
            return Ok(0.0);
        }
        self.log_a_theta(0.5 * (1.0 + self.sol.params.xi) * (-lambda2).ln())
    }

    pub fn a(&self, lambda2: f64) -> Result<f64> {
        Ok(self.log_a(lambda2)?.exp())
    }

    /// log A - M e^θ on the grid.
    pub fn line(&self) -> &[f64] {
        &self.line
    }
}

pub fn reconstruct_a_conformal(sol: &NlieSolution, lambda2: f64) -> Result<f64> {
    AReconstructor::new(sol)?.a(lambda2)
}
