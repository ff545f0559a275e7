//! TBA plateaus against the stationary Y-system.

use blz::tba::{build_system, default_grid, solve_tba, stationary_y, TbaConfig};

fn main() -> blz::error::Result<()> {
    for n in 1..=3 {
        let sys = build_system(n, 1.0)?;
        let sol = solve_tba(&sys, &default_grid(&sys)?, &TbaConfig::default())?;
        let y: Vec<f64> = sol.left_plateau().iter().map(|e| e.exp()).collect();
        println!("n={n} e^ε(-∞)={y:?} stationary={:?}", stationary_y(&sys));
    }
    Ok(())
}
