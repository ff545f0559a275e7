//! Q from its zeros: Hadamard product with a tail, compared with the reconstruction.

use blz::nlie::{default_grid_massive, find_zeros, solve_nlie_massive, HadamardQ, NlieConfig, QReconstructor};
use blz::numerics::C64;
use blz::params::ParamSet;

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::from_alpha(2.0, 0.1, 1.0)?;
    let sol = solve_nlie_massive(&ps, &default_grid_massive(&ps, 61)?, &NlieConfig::default())?;
    let z = find_zeros(&sol, -60, 59)?;
    let rec = QReconstructor::new(&sol)?;
    let h = HadamardQ::matched(&z, &rec, 60, C64::new(0.0, 0.0))?;
    for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let t = C64::new(x, 0.0);
        println!("θ={x:+.1} ratio {:.12}", (h.eval(t)? / rec.q(t)?).re);
    }
    Ok(())
}
