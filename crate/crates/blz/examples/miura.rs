//! Matrix monodromy of a Miura field against the scalar monodromy of its Miura image.

use blz::kdv::{matrix_monodromy, miura, scalar_monodromy, MiuraField, PeriodicPotential};
use blz::numerics::C64;

fn main() -> blz::error::Result<()> {
    let phi = MiuraField::new(0.2, PeriodicPotential::trig(0.0, 0.0, 0.3));
    let u = miura(&phi);
    for l in [1.0, 2.0, 3.0] {
        let m = matrix_monodromy(&phi, l)?;
        let s = scalar_monodromy(&u, C64::new(l, 0.0))?;
        println!("λ={l} tr M={:.12e} T={:.12e} det M={:.3e}", m.trace, s.trace, m.det);
    }
    Ok(())
}
