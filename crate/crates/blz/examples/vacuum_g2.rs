//! Vacuum eigenvalues of the local IM and the G2 quadrature check.

use blz::vacuum::{g2_lattice, vacuum_local_im, VacuumPoint};

fn main() -> blz::error::Result<()> {
    let vp = VacuumPoint::new(0.3, 0.1)?;
    for n in 1..=3 {
        println!("I_{} = {:.14}", 2 * n - 1, vacuum_local_im(&vp, n)?);
    }
    let worst = g2_lattice(2)?.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    println!("G2 worst relative error {worst:.2e}");
    Ok(())
}
