//! Q± from the linear problem as strip functions, their real zeros and the
//! comparison with the NLIE.

use super::linear::{spectral_q, spectral_t, QPair};
use super::mshg::MshgSolution;
use crate::error::{Error, Result};
use crate::nlie::{compute_script_s, find_zeros, NlieSolution};
use crate::numerics::{find_root_increasing, C64};
use crate::relations::StripFunction;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

/// Memoized (Q₊, Q₋) at θ̃.
pub struct OdeQCache<'a> {
    sol: &'a MshgSolution,
    cache: Mutex<HashMap<(u64, u64), QPair>>,
}

impl<'a> OdeQCache<'a> {
    pub fn new(sol: &'a MshgSolution) -> Self {
        Self { sol, cache: Mutex::new(HashMap::new()) }
    }

    pub fn solution(&self) -> &MshgSolution {
        self.sol
    }

    pub fn pair(&self, th: C64) -> Result<QPair> {
        let key = (th.re.to_bits(), th.im.to_bits());
        if let Some(q) = self.cache.lock().unwrap().get(&key) {
            return Ok(*q);
        }
        let q = spectral_q(self.sol, th)?;
        self.cache.lock().unwrap().insert(key, q);
        Ok(q)
    }

    pub fn plus(&self) -> OdeQ<'_> {
        OdeQ { cache: self, plus: true }
    }

    pub fn minus(&self) -> OdeQ<'_> {
        OdeQ { cache: self, plus: false }
    }
}

pub struct OdeQ<'a> {
    cache: &'a OdeQCache<'a>,
    plus: bool,
}

impl StripFunction for OdeQ<'_> {
    fn eval(&self, theta: C64) -> Result<C64> {
        let q = self.cache.pair(theta)?;
        Ok(if self.plus { q.plus } else { q.minus })
    }
    fn label(&self) -> String {
        if self.plus { "ode_Qplus" } else { "ode_Qminus" }.into()
    }
}

/// T_j from the Ξ route as a strip function.
pub struct OdeT<'a> {
    pub sol: &'a MshgSolution,
    pub j: f64,
}

impl StripFunction for OdeT<'_> {
    fn eval(&self, theta: C64) -> Result<C64> {
        spectral_t(self.sol, theta, self.j)
    }
    fn label(&self) -> String {
        format!("ode_T_{}", self.j)
    }
}

/// Real zeros of Q₊ (or Q₋) in [lo, hi], found by a sign scan of step `step`
/// and bisection-secant refinement.
pub fn ode_zeros(sol: &MshgSolution, lo: f64, hi: f64, step: f64, plus: bool) -> Result<Vec<f64>> {
    if !(hi > lo && step > 0.0) {
        return Err(Error::Usage(format!("bad scan [{lo}, {hi}] step {step}")));
    }
    let f = |x: f64| -> Result<f64> {
        let q = spectral_q(sol, C64::new(x, 0.0))?;
        Ok(if plus { q.plus.re } else { q.minus.re })
    };
    let n = ((hi - lo) / step).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for w in 0..n {
        if vals[w] == 0.0 {
            out.push(xs[w]);
        } else if vals[w].signum() != vals[w + 1].signum() {
            let sgn = vals[w + 1].signum();
            let err = std::cell::RefCell::new(None);
            let r = find_root_increasing(
                |x| match f(x) {
                    Ok(v) => sgn * v,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                },
                xs[w],
                xs[w + 1],
                1e-12,
            );
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            out.push(r?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Zeros of Q₊ from the ODE, in increasing order.
    pub ode_zeros: Vec<f64>,
    /// NLIE zeros θ_n, n = 0, 1, ...
    pub nlie_zeros: Vec<f64>,
    pub zero_rel_errors: Vec<f64>,
    pub eta0: f64,
    pub script_s_nlie: f64,
    pub script_s_closed: f64,
    pub script_s_rel_error: f64,
    /// The closed form times s^{-8k}; equal to the plain one at s = 1.
    pub script_s_closed_rescaled: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CrossCheck {
    pub fn worst(&self) -> f64 {
        self.zero_rel_errors.iter().copied().fold(self.script_s_rel_error, f64::max)
    }
}

/// Compares the first `count` positive zeros of the ODE Q₊ with the NLIE zeros
/// θ_0, θ_1, ... and 𝒮 from the NLIE with its closed form at the ODE η₀.
pub fn cross_check(sol: &MshgSolution, nlie: &NlieSolution, count: usize, tol: f64) -> Result<CrossCheck> {
    let zs = find_zeros(nlie, 0, count as i64 - 1)?;
    let nlie_zeros: Vec<f64> = zs.theta.values().copied().collect();
    let hi = nlie_zeros.last().copied().unwrap_or(1.0) + 0.5;
    let all = ode_zeros(sol, 0.0, hi, 0.05, true)?;
    if all.len() < count {
        return Err(Error::Alignment(format!("ODE Q₊ has {} zeros in [0, {hi:.3}], need {count}", all.len())));
    }
    let ode: Vec<f64> = all[..count].to_vec();
    let errs: Vec<f64> = ode.iter().zip(&nlie_zeros).map(|(a, b)| ((a - b) / b).abs()).collect();
    let ss = compute_script_s(nlie, Some(sol.eta0))?;
    let closed = ss.closed_form.unwrap_or(f64::NAN);
    let mut out = CrossCheck {
        ode_zeros: ode,
        nlie_zeros,
        zero_rel_errors: errs,
        eta0: sol.eta0,
        script_s_nlie: ss.value,
        script_s_closed: closed,
        script_s_rel_error: ((ss.value - closed) / closed).abs(),
        script_s_closed_rescaled: closed * sol.s.powf(-8.0 * nlie.params.k.abs()),
        tol,
        pass: false,
    };
    out.pass = out.worst() <= tol;
    Ok(out)
}
