use super::reconstruct::{trapezoid, QReconstructor};
use super::{NlieSolution, Variant};
use crate::error::{Error, Result};
use crate::numerics::{fit_exponential_tail, RapidityGrid, SampledFunction, TailFit, C64};
use crate::params::asymptotic_constants;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RESONANCE: f64 = 1e-3;

/// Coefficients of the large-|θ| expansion of log Q on the centre line,
/// log Q(θ+iτ) ~ r e^{±θ}/(4c) + iπk ± ½ log 𝒮 - Σ [𝓘_{±(2n-1)} e^{∓(2n-1)θ} - 𝓖_{±2n} e^{∓2nαθ}].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralsOfMotion {
    /// 𝓘_{2n-1}, n = 1..
    pub local_plus: Vec<f64>,
    /// 𝓘_{-(2n-1)}
    pub local_minus: Vec<f64>,
    /// 𝓖_{2n}
    pub nonlocal_plus: Vec<f64>,
    /// 𝓖_{-2n}
    pub nonlocal_minus: Vec<f64>,
    /// I_{2n-1} = 𝓘_{2n-1}/𝕮_n (empty when 𝕮_n is undefined)
    pub i_local: Vec<f64>,
    /// Ī_{2n-1} = 𝓘_{-(2n-1)}/𝕮_n
    pub i_bar_local: Vec<f64>,
}

/// (1/π) Im ∫ e^{p(θ-i0)} log(1 + e^{-iε(θ-i0)}) dθ, on the shifted line.
fn moment(sol: &NlieSolution, p: f64) -> f64 {
    let g = &sol.grid;
    let eta = sol.eta();
    let n = g.n_points;
    let it = (0..n).map(|j| (p * C64::new(g.node(j), -eta)).exp() * sol.ell[j]);
    trapezoid(it, n, g.spacing()).im / PI
}

pub fn extract_im(sol: &NlieSolution, n_max: usize) -> Result<IntegralsOfMotion> {
    if sol.variant != Variant::Massive {
        return Err(Error::Usage("integrals of motion need a massive solution".into()));
    }
    let ps = &sol.params;
    let alpha = ps.alpha;
    let lead = ps.r / (4.0 * (PI / (2.0 * alpha)).cos());
    let mut out = IntegralsOfMotion {
        local_plus: vec![],
        local_minus: vec![],
        nonlocal_plus: vec![],
        nonlocal_minus: vec![],
        i_local: vec![],
        i_bar_local: vec![],
    };
    for n in 1..=n_max {
        let p = (2 * n - 1) as f64;
        let s = (PI * p / (2.0 * alpha)).sin();
        if s.abs() < RESONANCE {
            return Err(Error::Resonance { n, value: s });
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let d = if n == 1 { -lead } else { 0.0 };
        out.local_plus.push(d + sign / s * moment(sol, p));
        out.local_minus.push(d - sign / s * moment(sol, -p));
        let c = (PI * alpha * n as f64).cos();
        if c.abs() < RESONANCE {
            return Err(Error::Resonance { n, value: c });
        }
        let q = 2.0 * alpha * n as f64;
        // (-1)^n = -sign
        out.nonlocal_plus.push(-alpha * sign / c * moment(sol, q));
        out.nonlocal_minus.push(alpha * sign / c * moment(sol, -q));
    }
    if let Ok(ac) = asymptotic_constants(ps, n_max) {
        out.i_local = out.local_plus.iter().zip(&ac.frak_c).map(|(a, c)| a / c).collect();
        out.i_bar_local = out.local_minus.iter().zip(&ac.frak_c).map(|(a, c)| a / c).collect();
    }
    Ok(out)
}

/// Exponents e^{-pθ} present in the right tail: odd integers and multiples of 2α.
pub fn tail_exponents(alpha: f64, count: usize) -> Vec<f64> {
    let mut v = Vec::new();
    let mut odd = 1.0;
    let mut m = 1.0;
    while v.len() < count {
        let a = 2.0 * alpha * m;
        if (odd - a).abs() < 1e-9 {
            v.push(odd);
            odd += 2.0;
            m += 1.0;
        } else if odd < a {
            v.push(odd);
            odd += 2.0;
        } else {
            v.push(a);
            m += 1.0;
        }
    }
    v
}

/// Fit of log Q(θ+iτ) - (r/2c) cosh θ - iπk - ½ log 𝒮 on [x0, x1] by
/// Σ a_p e^{-pθ}; the coefficient of e^{-θ} is -(𝓘₁ + r/4c).
pub fn fit_im_from_q(rec: &QReconstructor, x0: f64, x1: f64, count: usize) -> Result<(Vec<f64>, TailFit)> {
    let sol = rec.solution();
    let g = &sol.grid;
    let i0 = g.position(x0).ceil() as usize;
    let i1 = g.position(x1).floor() as usize + 1;
    let line = rec.h_line(0.0)?;
    let half = 0.5 * rec.log_s();
    let vals: Vec<C64> = line.iter().map(|v| v - half).collect();
    let f = SampledFunction::new(RapidityGrid::new(g.theta_min, g.theta_max, g.n_points)?, vals, 0.0)?;
    let exps = tail_exponents(sol.params.alpha, count);
    let neg: Vec<f64> = exps.iter().map(|e| -e).collect();
    let fit = fit_exponential_tail(&f, &neg, (i0, i1))?;
    Ok((exps, fit))
}
