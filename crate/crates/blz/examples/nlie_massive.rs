//! Massive NLIE at α = 2: plateau, first zeros and local integrals of motion.

use blz::nlie::{default_grid_massive, extract_im, find_zeros, solve_nlie_massive, NlieConfig};
use blz::params::ParamSet;

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::from_alpha(2.0, 0.1, 1.0)?;
    let sol = solve_nlie_massive(&ps, &default_grid_massive(&ps, 10)?, &NlieConfig::default())?;
    println!("iterations {} residual {:.2e}", sol.iterations, sol.residual);
    let z = find_zeros(&sol, -3, 3)?;
    for (n, t) in &z.theta {
        println!("θ_{n:<3} {t:.12}");
    }
    let im = extract_im(&sol, 3)?;
    println!("I_local {:?}", im.i_local);
    Ok(())
}
