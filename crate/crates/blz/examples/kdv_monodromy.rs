//! Classical KdV: T(λ) for a constant and a trigonometric potential.

use blz::kdv::{check_t_asymptotics, scalar_monodromy, PeriodicPotential};
use blz::numerics::C64;
use blz::relations::lattice;
use std::f64::consts::PI;

fn main() -> blz::error::Result<()> {
    let u0 = 0.7;
    let u = PeriodicPotential::constant(u0);
    for l in [2.0, 4.0, 6.0] {
        let t = scalar_monodromy(&u, C64::new(l, 0.0))?.trace.re;
        println!("λ={l} T={t:.10e} exact={:.10e}", 2.0 * (2.0 * PI * (l * l - u0).sqrt()).cosh());
    }
    let w = PeriodicPotential::trig(0.3, 0.5, -0.2);
    let fit = check_t_asymptotics(&w, &lattice(3.0, 10.0, 15), 6)?;
    println!("fitted {:?}\npredicted {:?}", &fit.fitted[..3], fit.predicted);
    Ok(())
}
