//! α = 1: the NLIE collapses to ε = r sinh θ - 2πk.

use blz::nlie::{default_grid_massive, find_zeros, solve_nlie_massive, NlieConfig};
use blz::params::ParamSet;
use std::f64::consts::PI;

fn main() -> blz::error::Result<()> {
    let (k, r) = (0.1, 1.0);
    let ps = ParamSet::from_alpha(1.0, k, r)?;
    let sol = solve_nlie_massive(&ps, &default_grid_massive(&ps, 10)?, &NlieConfig::default())?;
    for (n, t) in &find_zeros(&sol, 0, 5)?.theta {
        let exact = ((PI * (2 * n + 1) as f64 + 2.0 * PI * k) / r).asinh();
        println!("n={n} θ={t:.14} exact={exact:.14}");
    }
    Ok(())
}
