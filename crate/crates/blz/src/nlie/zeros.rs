use super::reconstruct::QReconstructor;
use super::NlieSolution;
use crate::error::{Error, Result};
use crate::numerics::{find_root_increasing, C64};
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Real zeros of Q, labelled by ε(θ_n) = π(2n+1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub theta: BTreeMap<i64, f64>,
    /// E_n(k) = s^{2α} e^{2θ_n α/(α+1)}, n ≥ 0.
    pub e_plus: BTreeMap<i64, f64>,
    /// E_n(-k) = s^{2α} e^{-2θ_{-n-1} α/(α+1)}, n ≥ 0.
    pub e_minus: BTreeMap<i64, f64>,
}

pub fn find_zeros(sol: &NlieSolution, n_lo: i64, n_hi: i64) -> Result<ZeroSet> {
    if n_hi < n_lo {
        return Err(Error::Usage(format!("empty zero range {n_lo}..={n_hi}")));
    }
    let g = &sol.grid;
    let nodes = g.nodes();
    let pad = 12;
    let eps: Vec<f64> = sol.epsilon.values.iter().map(|v| v.re).collect();
    let (lo_i, hi_i) = (pad, g.n_points - 1 - pad);
    let ps = &sol.params;
    let a = ps.alpha / (ps.alpha + 1.0);
    let s2a = ps.s.powf(2.0 * ps.alpha);
    let mut out = ZeroSet { theta: BTreeMap::new(), e_plus: BTreeMap::new(), e_minus: BTreeMap::new() };
    for n in [n_lo, n_hi] {
        let target = PI * (2 * n + 1) as f64;
        if !(eps[lo_i] < target && target < eps[hi_i]) {
            return Err(Error::Coverage(format!(
                "ε spans [{:.4}, {:.4}] inside the grid, zero n = {n} needs {target:.4}",
                eps[lo_i], eps[hi_i]
            )));
        }
    }
    for n in n_lo..=n_hi {
        let target = PI * (2 * n + 1) as f64;
        let i = lo_i + eps[lo_i..=hi_i].partition_point(|&v| v < target);
        let root = find_root_increasing(|x| sol.epsilon_at(x) - target, nodes[i - 1], nodes[i], 1e-14)?;
        out.theta.insert(n, root);
        if n >= 0 {
            out.e_plus.insert(n, s2a * (2.0 * a * root).exp());
        } else {
            out.e_minus.insert(-n - 1, s2a * (-2.0 * a * root).exp());
        }
    }
    Ok(out)
}

/// E_n(±k) ~ [2π(2n ± 2k + 1)/B]^{2α/(α+1)}.
pub fn e_asymptotic(ps: &ParamSet, n: i64, k: f64) -> f64 {
    let p = 2.0 * ps.alpha / (ps.alpha + 1.0);
    (2.0 * PI * (2.0 * n as f64 + 2.0 * k + 1.0) / ps.b_coef).powf(p)
}

const TAIL_TERMS: i64 = 20_000;

/// Hadamard product with 𝒞(k) = 1,
/// e^{2kθα/(α+1)} ∏_n (1 - s^{2α} e^{2θα/(α+1)}/E_n(k)) (1 - s^{2α} e^{-2θα/(α+1)}/E_n(-k)),
/// with n < n_tr from the zero set and the rest from the asymptotic law.
pub fn hadamard_q(zeros: &ZeroSet, ps: &ParamSet, n_tr: usize, theta: C64) -> Result<C64> {
    if ps.alpha <= 1.0 {
        return Err(Error::Domain(format!(
            "the Hadamard product converges only for α > 1 (α = {})",
            ps.alpha
        )));
    }
    let a = ps.alpha / (ps.alpha + 1.0);
    let p = 2.0 * a;
    let k = ps.k;
    let mut log = 2.0 * k * a * theta;
    for n in 0..n_tr as i64 {
        let (tp, tm) = match (zeros.theta.get(&n), zeros.theta.get(&(-n - 1))) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::Coverage(format!("zero pair n = {n} missing from the zero set"))),
        };
        log += (1.0 - (p * (theta - tp)).exp()).ln();
        log += (1.0 - (p * (tm - theta)).exp()).ln();
    }
    // s^{2α}/E_n(±k) = (r/(2π(2n±2k+1)))^p on the asymptotic law
    let xp = (p * (theta + ps.r.ln())).exp();
    let xm = (p * (-theta + ps.r.ln())).exp();
    for n in n_tr as i64..TAIL_TERMS {
        let nf = n as f64;
        log += (1.0 - xp / (2.0 * PI * (2.0 * nf + 2.0 * k + 1.0)).powf(p)).ln();
        log += (1.0 - xm / (2.0 * PI * (2.0 * nf - 2.0 * k + 1.0)).powf(p)).ln();
    }
    let rest = |kk: f64| (2.0 * PI).powf(-p) * (2.0 * TAIL_TERMS as f64 + 2.0 * kk + 1.0).powf(1.0 - p) / (2.0 * (p - 1.0));
    log -= xp * rest(k) + xm * rest(-k);
    Ok(log.exp())
}

/// Hadamard product with 𝒞(k) fixed by matching a reconstructed Q at one point.
pub struct HadamardQ<'a> {
    zeros: &'a ZeroSet,
    params: ParamSet,
    n_tr: usize,
    pub norm: C64,
}

impl<'a> HadamardQ<'a> {
    pub fn matched(zeros: &'a ZeroSet, rec: &QReconstructor, n_tr: usize, at: C64) -> Result<Self> {
        let params = rec.solution().params.clone();
        let norm = rec.q(at)? / hadamard_q(zeros, &params, n_tr, at)?;
        Ok(Self { zeros, params, n_tr, norm })
    }

    pub fn eval(&self, theta: C64) -> Result<C64> {
        Ok(self.norm * hadamard_q(self.zeros, &self.params, self.n_tr, theta)?)
    }
}
