//! Model parameters and the closed-form constants tying them together.

use crate::error::{Error, Result};
use crate::numerics::{gamma, ln_gamma, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default number of C_n and 𝕮_n coefficients kept in a [`ParamSet`].
pub const DEFAULT_N_MAX: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// C_1..C_n; C_0 = m.
    pub c: Vec<f64>,
    /// 𝕮_1..𝕮_n relating the Q-expansion coefficients to the local charges.
    pub frak_c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub beta2: f64,
    pub xi: f64,
    pub alpha: f64,
    pub c: f64,
    pub k: f64,
    pub l: f64,
    pub p: f64,
    pub h: f64,
    #[serde(rename = "R")]
    pub circumference: f64,
    /// Lagrangian coupling; absent when the mass formula cannot be inverted.
    pub mu: Option<f64>,
    pub s: f64,
    pub r: f64,
    pub soliton_mass: f64,
    pub m_coef: Option<f64>,
    #[serde(rename = "M_coef")]
    pub big_m_coef: Option<f64>,
    #[serde(rename = "B_coef")]
    pub b_coef: f64,
    #[serde(rename = "C_coefs")]
    pub c_coefs: Vec<f64>,
    #[serde(rename = "frakC_coefs")]
    pub frak_c_coefs: Vec<f64>,
}

/// B = 2√π Γ(1+1/2α)/Γ(3/2+1/2α), with r = B s^{1+α}.
pub fn b_coefficient(alpha: f64) -> Result<f64> {
    let a = 1.0 / (2.0 * alpha);
    Ok(2.0 * PI.sqrt() * (ln_gamma(1.0 + a)? - ln_gamma(1.5 + a)?).exp())
}

/// Soliton mass as a function of the Lagrangian coupling.
pub fn soliton_mass(mu: f64, xi: f64) -> Result<f64> {
    let pre = 2.0 / PI.sqrt() * gamma(xi / 2.0)? / gamma(0.5 + xi / 2.0)?;
    let base = PI * mu * gamma(1.0 / (1.0 + xi))? / gamma(xi / (1.0 + xi))?;
    Ok(pre * base.powf((1.0 + xi) / 2.0))
}

/// Inverse of [`soliton_mass`].
pub fn mu_from_mass(mass: f64, xi: f64) -> Result<f64> {
    let pre = 2.0 / PI.sqrt() * gamma(xi / 2.0)? / gamma(0.5 + xi / 2.0)?;
    let base = (mass / pre).powf(2.0 / (1.0 + xi));
    Ok(base / (PI * gamma(1.0 / (1.0 + xi))? / gamma(xi / (1.0 + xi))?))
}

/// s from circumference and coupling.
pub fn s_from_mu(circumference: f64, mu: f64, beta2: f64) -> Result<f64> {
    let g = gamma(1.0 - beta2)? / gamma(beta2)?;
    Ok((circumference / (PI * beta2)).powf(beta2) * (mu * PI * g).powf(beta2 / (2.0 - 2.0 * beta2)))
}

fn alpha_of(beta2: f64) -> f64 {
    1.0 / beta2 - 1.0
}

impl ParamSet {
    /// Build from coupling, quasi-momentum and scale; β² ∈ (0, 1/2).
    pub fn derive(beta2: f64, k: f64, r: f64, circumference: f64) -> Result<Self> {
        if !(beta2 > 0.0 && beta2 < 0.5) {
            return Err(Error::Domain(format!("beta2 = {beta2} outside (0, 1/2)")));
        }
        Self::build(beta2, k, r, circumference)
    }

    /// Build from α directly; admits the free-fermion point α = 1 and α < 1.
    pub fn from_alpha(alpha: f64, k: f64, r: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        let ps = Self::build(1.0 / (1.0 + alpha), k, r, 1.0)?;
        Ok(Self { alpha, xi: 1.0 / alpha, ..ps })
    }

    fn build(beta2: f64, k: f64, r: f64, circumference: f64) -> Result<Self> {
        if !(k.abs() <= 0.5) {
            return Err(Error::Domain(format!("k = {k} outside [-1/2, 1/2]")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("r = {r} must be non-negative")));
        }
        if !(circumference > 0.0) {
            return Err(Error::Domain(format!("R = {circumference} must be positive")));
        }
        let xi = beta2 / (1.0 - beta2);
        let alpha = alpha_of(beta2);
        let c = 13.0 - 6.0 * (beta2 + 1.0 / beta2);
        let p = beta2 * k;
        let h = p * p / beta2 + (c - 1.0) / 24.0;
        let b_coef = b_coefficient(alpha)?;
        let s = (r / b_coef).powf(1.0 / (1.0 + alpha));
        let mass = r / circumference;
        let mu = mu_from_mass(mass, xi).ok().filter(|v| v.is_finite());
        let mut ps = Self {
            beta2,
            xi,
            alpha,
            c,
            k,
            l: 2.0 * k.abs() - 0.5,
            p,
            h,
            circumference,
            mu,
            s,
            r,
            soliton_mass: mass,
            m_coef: None,
            big_m_coef: None,
            b_coef,
            c_coefs: Vec::new(),
            frak_c_coefs: Vec::new(),
        };
        if let Ok(ac) = asymptotic_constants(&ps, DEFAULT_N_MAX) {
            ps.m_coef = Some(ac.m);
            ps.big_m_coef = Some(ac.big_m);
            ps.c_coefs = ac.c;
            ps.frak_c_coefs = ac.frak_c;
        }
        Ok(ps)
    }

    /// Conformal parameter set labelled by the vacuum parameter p directly;
    /// k = p/β² is not restricted to [-1/2, 1/2] here.
    pub fn conformal(beta2: f64, p: f64) -> Result<Self> {
        let mut ps = Self::derive(beta2, 0.0, 1.0, 1.0)?;
        ps.k = p / beta2;
        ps.l = 2.0 * ps.k.abs() - 0.5;
        ps.p = p;
        ps.h = p * p / beta2 + (ps.c - 1.0) / 24.0;
        Ok(ps)
    }

    /// The inputs that [`ParamSet::derive`] needs to rebuild this set.
    pub fn extract(&self) -> (f64, f64, f64, f64) {
        (self.beta2, self.k, self.r, self.circumference)
    }

    /// Copy with a different quasi-momentum.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        let base = Self::build(self.beta2, k, self.r, self.circumference)?;
        Ok(Self { alpha: self.alpha, xi: self.xi, ..base })
    }

    /// Copy with a different scale r.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        let base = Self::build(self.beta2, self.k, r, self.circumference)?;
        Ok(Self { alpha: self.alpha, xi: self.xi, ..base })
    }

    /// τ = π(α+1)/2α, the centre line of the Q strip.
    pub fn tau(&self) -> f64 {
        0.5 * PI * (self.alpha + 1.0) / self.alpha
    }

    /// TBA masses m_j ∝ sin(πjξ), normalized to m_{1/2} = 1.
    pub fn tba_mass_ratio(&self, j: f64) -> f64 {
        (PI * j * self.xi).sin() / (0.5 * PI * self.xi).sin()
    }
}

/// m, M, C_1..C_n and 𝕮_1..𝕮_n.
pub fn asymptotic_constants(ps: &ParamSet, n_max: usize) -> Result<AsymptoticConstants> {
    let xi = ps.xi;
    if xi >= 1.0 {
        return Err(Error::Domain(format!("xi = {xi} ≥ 1 hits the pole of Γ(1/2 - ξ/2)")));
    }
    let ratio = gamma(0.5 - xi / 2.0)? / gamma(1.0 - xi / 2.0)?;
    let g = gamma(1.0 / (1.0 + xi))?.powf(1.0 + xi);
    let m = 2.0 * PI.sqrt() * ratio * g;
    let big_m = gamma(xi / 2.0)? * gamma(0.5 - xi / 2.0)? * g / PI.sqrt();
    let mut c = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        let kf = k as f64;
        let lg = ln_gamma((1.0 + xi) * (kf - 0.5))? - ln_gamma(1.0 + (kf - 0.5) * xi)? - ln_gamma(kf + 1.0)?;
        c.push(
            (1.0 + xi)
                * (PI * xi / (1.0 + xi)).powi(k as i32)
                * (2.0 / m * ratio).powi(2 * k as i32 - 1)
                * lg.exp(),
        );
    }
    let alpha = ps.alpha;
    let base = 2.0 * ps.soliton_mass * (PI / (2.0 * alpha)).sin() / (8.0 * PI.sqrt())
        * gamma((alpha + 1.0) / (2.0 * alpha))?
        * gamma(-1.0 / (2.0 * alpha))?;
    let mut frak_c = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nf = n as f64;
        let odd = 2.0 * nf - 1.0;
        let v = (-alpha * alpha / (alpha + 1.0)).powi(n as i32 - 1)
            * gamma(-odd / (2.0 * alpha))?
            * gamma(odd * (alpha + 1.0) / (2.0 * alpha))?
            / (2.0 * PI.sqrt() * gamma(nf + 1.0)?)
            * base.powi(1 - 2 * n as i32);
        frak_c.push(v);
    }
    Ok(AsymptoticConstants { m, big_m, c, frak_c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuConversions {
    /// μ̂²/μ².
    pub mu_hat2: C64,
    /// μ̃²/μ̂².
    pub mu_tilde2: C64,
}

/// Conversion factors between μ, μ̂ and μ̃. Complex for β² ∈ (1/3, 1/2),
/// where the square-rooted gamma ratios turn negative.
pub fn mu_conversions(ps: &ParamSet) -> Result<MuConversions> {
    let b = ps.beta2;
    let f1 = 1.0 - 2.0 * b;
    let f2 = 3.0 * b - 1.0;
    if f1.abs() < 1e-12 {
        return Err(Error::Domain("factor (1 - 2β²) vanishes".into()));
    }
    if f2.abs() < 1e-12 {
        return Err(Error::Domain("factor (3β² - 1) vanishes".into()));
    }
    let g = |x: f64| gamma(x);
    let r1 = g(3.0 * b)? * g(b)? / (g(1.0 - 3.0 * b)? * g(1.0 - b)?);
    let r2 = g(b)?.powi(3) * g(1.0 - 3.0 * b)? / (g(1.0 - b)?.powi(3) * g(3.0 * b)?);
    let mu_hat2 = C64::new(r1, 0.0).sqrt() * (g(1.0 - b)?.powi(2) / (PI * f1 * f2));
    let mu_tilde2 = C64::new(r2, 0.0).sqrt() * (f1 * f2 / PI);
    Ok(MuConversions { mu_hat2, mu_tilde2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn third_coupling() {
        let ps = ParamSet::derive(1.0 / 3.0, 0.1, 1.0, 1.0).unwrap();
        assert!((ps.xi - 0.5).abs() < 1e-15);
        assert!((ps.alpha - 2.0).abs() < 1e-14);
        assert!((ps.c + 7.0).abs() < 1e-13);
        let b = 2.0 * PI.sqrt() * gamma(1.25).unwrap() / gamma(1.75).unwrap();
        assert!((ps.s - (1.0 / b).powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn near_half_alpha_to_one() {
        let ps = ParamSet::derive(0.5 - 1e-9, 0.0, 1.0, 1.0).unwrap();
        assert!(ps.alpha > 1.0 && ps.alpha - 1.0 < 1e-8);
        assert!(ParamSet::derive(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(ParamSet::from_alpha(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn m_and_big_m_at_half() {
        let ps = ParamSet::derive(1.0 / 3.0, 0.0, 1.0, 1.0).unwrap();
        let g = |x: f64| gamma(x).unwrap();
        let m = 2.0 * PI.sqrt() * g(0.25) / g(0.75) * g(2.0 / 3.0).powf(1.5);
        let big_m = g(0.25) * g(0.25) * g(2.0 / 3.0).powf(1.5) / PI.sqrt();
        assert!((ps.m_coef.unwrap() / m - 1.0).abs() < 1e-13);
        assert!((ps.big_m_coef.unwrap() / big_m - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tba_mass_ratio_at_one() {
        let ps = ParamSet::derive(0.2, 0.0, 1.0, 1.0).unwrap();
        let want = 2.0 * (0.5 * PI * ps.xi).cos();
        assert!((ps.tba_mass_ratio(1.0) - want).abs() < 1e-14);
    }

    #[test]
    fn scale_identifications_agree() {
        // r = B s^{1+α} with s from the coupling must equal 𝔐 R
        for &b2 in &[0.2, 1.0 / 3.0, 0.41] {
            let xi = b2 / (1.0 - b2);
            let (circ, mu) = (1.3, 0.7);
            let s = s_from_mu(circ, mu, b2).unwrap();
            let r = b_coefficient(1.0 / xi).unwrap() * s.powf(1.0 + 1.0 / xi);
            let m = soliton_mass(mu, xi).unwrap();
            assert!((r / (m * circ) - 1.0).abs() < 1e-13, "{b2}");
            let ps = ParamSet::derive(b2, 0.0, r, circ).unwrap();
            assert!((ps.mu.unwrap() / mu - 1.0).abs() < 1e-12);
            assert!((ps.s / s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn mu_conversion_composition() {
        // the gamma ratios collapse: μ̃²/μ² = Γ(β²)²/π²
        let ps = ParamSet::derive(0.3, 0.0, 1.0, 1.0).unwrap();
        let mc = mu_conversions(&ps).unwrap();
        assert!(mc.mu_hat2.im == 0.0 && mc.mu_tilde2.im == 0.0);
        assert!(mc.mu_hat2.re.is_finite() && mc.mu_tilde2.re.is_finite());
        let want = gamma(0.3).unwrap().powi(2) / (PI * PI);
        assert!(((mc.mu_hat2 * mc.mu_tilde2).re / want - 1.0).abs() < 1e-13);
        let near = ParamSet::derive(1.0 / 3.0, 0.0, 1.0, 1.0).unwrap();
        let err = mu_conversions(&near).unwrap_err();
        assert!(err.to_string().contains("3β²"));
    }

    #[test]
    fn c_zero_is_m_and_c1_positive() {
        let ps = ParamSet::derive(0.25, 0.0, 1.0, 1.0).unwrap();
        let ac = asymptotic_constants(&ps, 3).unwrap();
        assert_eq!(ac.c.len(), 3);
        assert!(ac.c[0] > 0.0);
        // C_1 = (1+ξ)(πξ/(1+ξ)) (2Γ(1/2-ξ/2)/(m Γ(1-ξ/2))) Γ((1+ξ)/2)/Γ(1+ξ/2)
        let xi = ps.xi;
        let g = |x: f64| gamma(x).unwrap();
        let c1 = PI * xi * 2.0 * g(0.5 - xi / 2.0) / (ac.m * g(1.0 - xi / 2.0)) * g((1.0 + xi) / 2.0) / g(1.0 + xi / 2.0);
        assert!((ac.c[0] / c1 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn serializes_flat() {
        let ps = ParamSet::derive(0.3, 0.2, 1.0, 1.0).unwrap();
        let v = serde_json::to_value(&ps).unwrap();
        for key in ["beta2", "xi", "alpha", "R", "M_coef", "B_coef", "C_coefs", "frakC_coefs", "soliton_mass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: ParamSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, ps);
    }

    proptest! {
        #[test]
        fn table_identities(b2 in 0.05f64..0.45, k in -0.5f64..0.5, r in 0.01f64..5.0, circ in 0.2f64..4.0) {
            let ps = ParamSet::derive(b2, k, r, circ).unwrap();
            prop_assert!((ps.xi - b2 / (1.0 - b2)).abs() < 1e-14);
            prop_assert!((ps.alpha * ps.xi - 1.0).abs() < 1e-14);
            prop_assert!((ps.c - (13.0 - 6.0 * (b2 + 1.0 / b2))).abs() < 1e-12);
            prop_assert!((ps.h - (ps.p * ps.p / b2 + (ps.c - 1.0) / 24.0)).abs() < 1e-13);
            prop_assert!((ps.b_coef * ps.s.powf(1.0 + ps.alpha) / r - 1.0).abs() < 1e-13);
            prop_assert!((ps.soliton_mass * circ / r - 1.0).abs() < 1e-14);
            prop_assert!(ps.l.abs() <= 0.5 + 1e-15);
            let (b, kk, rr, cc) = ps.extract();
            let again = ParamSet::derive(b, kk, rr, cc).unwrap();
            prop_assert_eq!(again, ps);
        }
    }
}
