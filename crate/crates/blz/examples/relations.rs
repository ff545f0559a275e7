//! Quantum Wronskian and T-system residuals from the reconstructed Q.

use blz::nlie::{default_grid_massive, solve_nlie_massive, NlieConfig, QReconstructor};
use blz::params::ParamSet;
use blz::relations::{check_quantum_wronskian, check_t_system, lattice, nlie_q_pair, Normalization, StripFunction, TFamily, TFromQ};

fn main() -> blz::error::Result<()> {
    let ps = ParamSet::from_alpha(2.0, 0.1, 1.0)?;
    let sol = solve_nlie_massive(&ps, &default_grid_massive(&ps, 10)?, &NlieConfig::default())?;
    let rec = QReconstructor::new(&sol)?;
    let (qp, qm) = nlie_q_pair(&rec);
    let th = lattice(-1.0, 1.0, 11);
    let qw = check_quantum_wronskian(&qp, &qm, &th, &ps, Normalization::Operator)?;
    println!("quantum Wronskian max residual {:.2e}", qw.max_residual);
    let ts: Vec<TFromQ> =
        (1..=4).map(|i| TFromQ { qp: &qp, qm: &qm, j: i as f64 / 2.0, ps: &ps, norm: Normalization::Operator }).collect();
    let fam: TFamily = ts.iter().enumerate().map(|(i, t)| (i as i32 + 1, t as &dyn StripFunction)).collect();
    for r in check_t_system(&fam, &th, &ps, 1.5)? {
        println!("T-system j={:?} max residual {:.2e}", r.j, r.max_residual);
    }
    Ok(())
}
