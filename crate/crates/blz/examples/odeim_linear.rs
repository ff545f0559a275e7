//! MShG background and the linear problem: Wronskians and Q± at a few θ.

use blz::odeim::{integrate_linear_problem, solve_mshg, spectral_q, MshgDiscretization};
use blz::numerics::C64;
use blz::params::ParamSet;

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::from_alpha(2.0, 0.1, 1.0)?;
    let d = MshgDiscretization::default_for(2.0, ps.s, ps.l);
    let sol = solve_mshg(2.0, ps.s, ps.l, &d, 1e-12)?;
    println!("η₀ = {:.12}", sol.eta0);
    for th in [-1.0, 0.0, 1.0] {
        let run = integrate_linear_problem(&sol, th, None)?;
        let q = spectral_q(&sol, C64::new(th, 0.0))?;
        println!("θ={th:+} det(Ξ₋,Ξ₊)={:.3e} Q₊={:.10e} Q₋={:.10e}", run.det_xi, q.plus.re, q.minus.re);
    }
    Ok(())
}
