//! Conformal NLIE and the vacuum eigenvalue A(λ²) on the negative axis.

use blz::nlie::{default_grid_conformal, solve_nlie_conformal, AReconstructor, NlieConfig};
use blz::params::ParamSet;
use blz::relations::lattice;

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::conformal(0.3, 0.1)?;
    let sol = solve_nlie_conformal(&ps, &default_grid_conformal(&ps)?, &NlieConfig::default())?;
    let rec = AReconstructor::new(&sol)?;
    for l in lattice(-4.0, 0.0, 9) {
        println!("λ²={l:+.2} A={:.12}", rec.a(l)?);
    }
    Ok(())
}
