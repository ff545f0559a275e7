//! T-functions from Q-functions and residual checks of the functional
//! relations: quantum Wronskian, T-Q, T-system and Y-system.
//!
//! Q and T enter as evaluators so the same checks run on NLIE data, on
//! spectral determinants and on synthetic functions.

use crate::error::{Error, Result};
use crate::nlie::QReconstructor;
use crate::numerics::C64;
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub trait StripFunction: Sync {
    fn eval(&self, theta: C64) -> Result<C64>;

    /// Largest |Im θ| the evaluator accepts.
    fn strip_halfwidth(&self) -> f64 {
        f64::INFINITY
    }

    fn label(&self) -> String;

    fn at(&self, theta: C64) -> Result<C64> {
        let w = self.strip_halfwidth();
        if theta.im.abs() > w {
            return Err(Error::Domain(format!("{}: Im θ = {} outside |Im θ| ≤ {w}", self.label(), theta.im)));
        }
        self.eval(theta)
    }
}

/// A closure with a strip and a label.
pub struct FnStrip<F> {
    f: F,
    halfwidth: f64,
    label: String,
}

impl<F: Fn(C64) -> Result<C64> + Sync> FnStrip<F> {
    pub fn new(label: impl Into<String>, halfwidth: f64, f: F) -> Self {
        Self { f, halfwidth, label: label.into() }
    }
}

impl<F: Fn(C64) -> Result<C64> + Sync> StripFunction for FnStrip<F> {
    fn eval(&self, theta: C64) -> Result<C64> {
        (self.f)(theta)
    }
    fn strip_halfwidth(&self) -> f64 {
        self.halfwidth
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Q₊ and Q₋ from a massive NLIE solution. For k ≥ 0, Q₊(θ) = Q(θ, k) and
/// Q₋(θ) = Q(-θ, k); negative k swaps the two. The pair follows the
/// operator normalization (Wronskian 2i sin 2πk).
pub struct NlieQ<'a> {
    rec: &'a QReconstructor<'a>,
    plus: bool,
}

pub fn nlie_q_pair<'a>(rec: &'a QReconstructor<'a>) -> (NlieQ<'a>, NlieQ<'a>) {
    (NlieQ { rec, plus: true }, NlieQ { rec, plus: false })
}

impl StripFunction for NlieQ<'_> {
    fn eval(&self, theta: C64) -> Result<C64> {
        let flip = self.plus == (self.rec.solution().params.k < 0.0);
        if flip {
            self.rec.q(-theta)
        } else {
            self.rec.q(theta)
        }
    }
    fn label(&self) -> String {
        if self.plus { "Qplus" } else { "Qminus" }.into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// i/(2 cos πl) in front of the bilinear.
    Ode,
    /// 1/(2i sin 2πP), P = p/β².
    Operator,
}

fn prefactor(ps: &ParamSet, norm: Normalization) -> Result<C64> {
    match norm {
        Normalization::Ode => {
            let c = (PI * ps.l).cos();
            if c.abs() < 1e-6 {
                return Err(Error::Domain(format!("cos πl = {c:.1e}: T undefined at l = {}", ps.l)));
            }
            Ok(C64::new(0.0, 0.5 / c))
        }
        Normalization::Operator => {
            let s = (2.0 * PI * ps.p / ps.beta2).sin();
            if s.abs() < 1e-6 {
                return Err(Error::Domain(format!("sin 2πP = {s:.1e}: T undefined")));
            }
            Ok(C64::new(0.0, -0.5 / s))
        }
    }
}

pub fn t_from_q(
    qp: &dyn StripFunction,
    qm: &dyn StripFunction,
    j: f64,
    theta: C64,
    ps: &ParamSet,
    norm: Normalization,
) -> Result<C64> {
    let pre = prefactor(ps, norm)?;
    let sh = C64::new(0.0, PI * (2.0 * j + 1.0) / (2.0 * ps.alpha));
    let a = qp.at(theta + sh)? * qm.at(theta - sh)?;
    let b = qp.at(theta - sh)? * qm.at(theta + sh)?;
    Ok(pre * (a - b))
}

/// T_j built from a Q pair, as a strip function.
pub struct TFromQ<'a> {
    pub qp: &'a dyn StripFunction,
    pub qm: &'a dyn StripFunction,
    pub j: f64,
    pub ps: &'a ParamSet,
    pub norm: Normalization,
}

impl StripFunction for TFromQ<'_> {
    fn eval(&self, theta: C64) -> Result<C64> {
        t_from_q(self.qp, self.qm, self.j, theta, self.ps, self.norm)
    }
    fn strip_halfwidth(&self) -> f64 {
        let sh = PI * (2.0 * self.j + 1.0) / (2.0 * self.ps.alpha);
        (self.qp.strip_halfwidth().min(self.qm.strip_halfwidth()) - sh).max(0.0)
    }
    fn label(&self) -> String {
        format!("T_{}", self.j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub j: Option<f64>,
    pub theta_lattice: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

impl ResidualReport {
    fn new(identity: &str, j: Option<f64>, thetas: &[f64], res: &[f64]) -> Self {
        let max = res.iter().cloned().fold(0.0, f64::max);
        let mean = if res.is_empty() { 0.0 } else { res.iter().sum::<f64>() / res.len() as f64 };
        Self {
            identity: identity.into(),
            j,
            theta_lattice: thetas.to_vec(),
            max_residual: max,
            mean_residual: mean,
            spread: None,
            normalization: None,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual.is_finite() && self.max_residual < tol
    }
}

/// The Wronskian constant paired with a normalization, so that T_0 = 1.
pub fn wronskian_constant(ps: &ParamSet, norm: Normalization) -> C64 {
    match norm {
        Normalization::Ode => C64::new(0.0, -2.0 * (PI * ps.l).cos()),
        Normalization::Operator => C64::new(0.0, 2.0 * (2.0 * PI * ps.p / ps.beta2).sin()),
    }
}

/// Q₊(θ+iπ/2α)Q₋(θ-iπ/2α) - Q₋(θ+iπ/2α)Q₊(θ-iπ/2α) against -2i cos πl (Ode)
/// or 2i sin 2πP (Operator).
pub fn check_quantum_wronskian(
    qp: &dyn StripFunction,
    qm: &dyn StripFunction,
    thetas: &[f64],
    ps: &ParamSet,
    norm: Normalization,
) -> Result<ResidualReport> {
    let target = wronskian_constant(ps, norm);
    let sh = C64::new(0.0, PI / (2.0 * ps.alpha));
    let mut w = Vec::with_capacity(thetas.len());
    for &x in thetas {
        let z = C64::new(x, 0.0);
        w.push(qp.at(z + sh)? * qm.at(z - sh)? - qm.at(z + sh)? * qp.at(z - sh)?);
    }
    let res: Vec<f64> = w.iter().map(|v| (v - target).norm() / target.norm()).collect();
    let mut rep = ResidualReport::new("quantum_wronskian", None, thetas, &res);
    let n = w.len().max(1) as f64;
    let mean: C64 = w.iter().sum::<C64>() / n;
    let var = w.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n;
    rep.spread = Some(var.sqrt() / mean.norm());
    rep.normalization = Some(norm);
    Ok(rep)
}

/// T(θ)Q(θ) = Q(θ+iπξ) + Q(θ-iπξ), normalized by the largest term.
pub fn check_tq(t: &dyn StripFunction, q: &dyn StripFunction, thetas: &[f64], ps: &ParamSet) -> Result<ResidualReport> {
    let sh = C64::new(0.0, PI * ps.xi);
    let mut res = Vec::with_capacity(thetas.len());
    for &x in thetas {
        let z = C64::new(x, 0.0);
        let lhs = t.at(z)? * q.at(z)?;
        let (a, b) = (q.at(z + sh)?, q.at(z - sh)?);
        let scale = lhs.norm().max(a.norm()).max(b.norm());
        res.push((lhs - a - b).norm() / scale);
    }
    Ok(ResidualReport::new("tq", Some(0.5), thetas, &res))
}

/// T-functions keyed by 2j. T_0 = 1 and T_{-1/2} = 0 are implied.
pub type TFamily<'a> = BTreeMap<i32, &'a dyn StripFunction>;

fn t_value(family: &TFamily, two_j: i32, z: C64) -> Result<C64> {
    match two_j {
        -1 => Ok(C64::new(0.0, 0.0)),
        0 => Ok(C64::new(1.0, 0.0)),
        _ => family
            .get(&two_j)
            .ok_or_else(|| Error::Usage(format!("T_{} missing from the family", two_j as f64 / 2.0)))?
            .at(z),
    }
}

/// T_j(θ+iπξ/2)T_j(θ-iπξ/2) = 1 + T_{j+1/2}(θ)T_{j-1/2}(θ), one report per j in 1/2..=j_max.
pub fn check_t_system(family: &TFamily, thetas: &[f64], ps: &ParamSet, j_max: f64) -> Result<Vec<ResidualReport>> {
    let sh = C64::new(0.0, PI * ps.xi / 2.0);
    let top = (2.0 * j_max).round() as i32;
    let mut out = Vec::new();
    for tj in 1..=top {
        let mut res = Vec::with_capacity(thetas.len());
        for &x in thetas {
            let z = C64::new(x, 0.0);
            let lhs = t_value(family, tj, z + sh)? * t_value(family, tj, z - sh)?;
            let prod = t_value(family, tj + 1, z)? * t_value(family, tj - 1, z)?;
            let scale = lhs.norm().max(prod.norm()).max(1.0);
            res.push((lhs - 1.0 - prod).norm() / scale);
        }
        out.push(ResidualReport::new("t_system", Some(tj as f64 / 2.0), thetas, &res));
    }
    Ok(out)
}

/// Y_j = T_{j-1/2}T_{j+1/2} and Y_j(θ+iπξ/2)Y_j(θ-iπξ/2) = (1+Y_{j+1/2})(1+Y_{j-1/2}),
/// for every j the family supports.
pub fn build_and_check_y(family: &TFamily, thetas: &[f64], ps: &ParamSet) -> Result<Vec<ResidualReport>> {
    let top = family.keys().max().copied().unwrap_or(0);
    let sh = C64::new(0.0, PI * ps.xi / 2.0);
    let y = |tj: i32, z: C64| -> Result<C64> { Ok(t_value(family, tj - 1, z)? * t_value(family, tj + 1, z)?) };
    let mut out = Vec::new();
    for tj in 1..top - 1 {
        let mut res = Vec::with_capacity(thetas.len());
        for &x in thetas {
            let z = C64::new(x, 0.0);
            let lhs = y(tj, z + sh)? * y(tj, z - sh)?;
            let rhs = (1.0 + y(tj + 1, z)?) * (1.0 + y(tj - 1, z)?);
            res.push((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
        }
        out.push(ResidualReport::new("y_system", Some(tj as f64 / 2.0), thetas, &res));
    }
    Ok(out)
}

pub fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
