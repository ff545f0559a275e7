//! Massive ODE/IM: the modified sinh-Gordon equation, its linear problem, and the
//! spectral determinants Q± and T_j built from it.

mod linear;
mod mshg;
mod spectral;

pub use mshg::{far_radius, solve_mshg, EtaPoint, MshgDiscretization, MshgSolution};
pub use linear::{
    det, far_start, integrate_linear_problem, matching_t, psi_initial, spectral_q, spectral_q_with, spectral_t,
    transport, xi_minus_far, xi_n, xi_on_ray, LinearRunResult, QPair, Scaled, DEFAULT_RTOL,
};
pub use spectral::{cross_check, ode_zeros, CrossCheck, OdeQ, OdeQCache, OdeT};
