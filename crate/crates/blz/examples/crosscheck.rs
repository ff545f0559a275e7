//! Zeros of the ODE Q₊ against the NLIE zeros, plus the 𝒮 comparison.

use blz::nlie::{default_grid_massive, solve_nlie_massive, NlieConfig};
use blz::odeim::{cross_check, solve_mshg, MshgDiscretization};
use blz::params::ParamSet;

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::from_alpha(2.0, 0.1, 1.0)?;
    let d = MshgDiscretization::default_for(2.0, ps.s, ps.l);
    let ode = solve_mshg(2.0, ps.s, ps.l, &d, 1e-12)?;
    let nl = solve_nlie_massive(&ps, &default_grid_massive(&ps, 10)?, &NlieConfig::default())?;
    let rep = cross_check(&ode, &nl, 3, 1e-2)?;
    for (a, b) in rep.ode_zeros.iter().zip(&rep.nlie_zeros) {
        println!("ode {a:.12} nlie {b:.12}");
    }
    println!("𝒮 nlie {:.8} closed {:.8} closed·s^(-8k) {:.8}", rep.script_s_nlie, rep.script_s_closed, rep.script_s_closed_rescaled);
    Ok(())
}
