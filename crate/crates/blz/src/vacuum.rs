//! Vacuum data of the c < 1 CFT: Coulomb-gas G₂, vertex-operator pairs, local IM polynomials.

use crate::error::{Error, Result};
use crate::numerics::{gamma, quad, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumPoint {
    pub beta2: f64,
    pub p: f64,
    pub h: f64,
    pub c: f64,
}

impl VacuumPoint {
    pub fn new(beta2: f64, p: f64) -> Result<Self> {
        if !(beta2 > 0.0 && beta2 < 0.5) {
            return Err(Error::Domain(format!("β² = {beta2} outside (0, 1/2)")));
        }
        let n = -(2.0 * p + beta2);
        if n >= -1e-12 && (n - n.round()).abs() < 1e-12 {
            return Err(Error::Domain(format!("2p = {} sits on an excluded weight", 2.0 * p)));
        }
        let c = 13.0 - 6.0 * (beta2 + 1.0 / beta2);
        let h = p * p / beta2 + (c - 1.0) / 24.0;
        Ok(Self { beta2, p, h, c })
    }

    /// Bypass (h, c) derivation, for polynomial checks at arbitrary points.
    pub fn with_hc(h: f64, c: f64) -> Self {
        Self { beta2: f64::NAN, p: f64::NAN, h, c }
    }
}

/// ⟨p|V_ε(w) V_ε̃(w̃)|p⟩ with the principal branch of the power.
pub fn vertex_pair(w: f64, wt: f64, eps: i8, epst: i8, vp: &VacuumPoint) -> Result<C64> {
    if eps.abs() != 1 || epst.abs() != 1 {
        return Err(Error::Usage("vertex signs must be ±1".into()));
    }
    let (e, et) = (eps as f64, epst as f64);
    let s = 2.0 * ((w - wt) / 2.0).sin();
    let expo = -2.0 * e * et * vp.beta2;
    if s.abs() < 1e-300 {
        if expo < 0.0 {
            return Err(Error::Domain("coincident vertex operators of equal sign".into()));
        }
        return Ok(C64::new(0.0, 0.0));
    }
    let phase = C64::from_polar(1.0, -2.0 * vp.p * (et * w + e * wt));
    Ok(phase * C64::new(s, 0.0).powf(expo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum G2Mode {
    Closed,
    Quadrature,
}

pub fn g2_vacuum(vp: &VacuumPoint, mode: G2Mode) -> Result<f64> {
    match mode {
        G2Mode::Closed => g2_closed(vp),
        G2Mode::Quadrature => Ok(g2_quadrature(vp, 80)),
    }
}

fn g2_closed(vp: &VacuumPoint) -> Result<f64> {
    let b = vp.beta2;
    // numerator Γ(1-2β²): the double integral diverges as β² → 1/2
    for a in [1.0 - 2.0 * vp.p - b, 1.0 + 2.0 * vp.p - b] {
        if a <= 0.0 && (a - a.round()).abs() < 1e-12 {
            return Err(Error::Resonance { n: (-a).round() as usize, value: a });
        }
    }
    Ok(4.0 * PI * PI * gamma(1.0 - 2.0 * b)? / (gamma(1.0 - 2.0 * vp.p - b)? * gamma(1.0 + 2.0 * vp.p - b)?))
}

/// ∫₀^{2π} u^{-2β²}(2π-u)^{k-2β²} g(u) du with g smooth, by Gauss–Jacobi on u = π(1+x).
fn jacobi_on_circle(beta2: f64, k: f64, n: usize, g: impl Fn(f64) -> f64) -> f64 {
    let (x, wts) = quad::gauss_jacobi(n, k - 2.0 * beta2, -2.0 * beta2);
    let jac = PI.powf(1.0 + k - 4.0 * beta2);
    x.iter().zip(&wts).map(|(&x, &w)| w * g(PI * (1.0 + x))).sum::<f64>() * jac
}

/// [u(2π-u) / 2sin(u/2)]^{2β²}, smooth on [0, 2π].
fn regular_factor(u: f64, beta2: f64) -> f64 {
    let s = 2.0 * (u / 2.0).sin();
    let r = if s.abs() < 1e-8 {
        // both ends: the ratio tends to 2π
        2.0 * PI
    } else {
        u * (2.0 * PI - u) / s
    };
    r.powf(2.0 * beta2)
}

/// The inner integral depends on u = w - w̃ only, leaving ∫₀^{2π} (2π-u) f(u) du.
pub fn g2_quadrature(vp: &VacuumPoint, n: usize) -> f64 {
    let b = vp.beta2;
    jacobi_on_circle(b, 1.0, n, |u| 2.0 * (2.0 * PI * vp.p - 2.0 * vp.p * u).cos() * regular_factor(u, b))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct G2Comparison {
    pub beta2: f64,
    pub p: f64,
    pub closed: f64,
    pub quadrature: f64,
    pub rel_error: f64,
}

pub fn g2_compare(vp: &VacuumPoint) -> Result<G2Comparison> {
    let closed = g2_closed(vp)?;
    let quadrature = g2_quadrature(vp, 80);
    Ok(G2Comparison { beta2: vp.beta2, p: vp.p, closed, quadrature, rel_error: ((quadrature - closed) / closed).abs() })
}

/// β² ∈ {0.1, 0.2, 0.3, 0.4} and |2p| < 1 - β² - 0.05, `per_side` values of p on each side of 0.
pub fn g2_lattice(per_side: usize) -> Result<Vec<G2Comparison>> {
    use rayon::prelude::*;
    let mut pts = Vec::new();
    for b in [0.1, 0.2, 0.3, 0.4] {
        let pmax = (1.0 - b - 0.05) / 2.0;
        for i in 0..=2 * per_side {
            let p = pmax * (i as f64 / per_side as f64 - 1.0) * 0.999;
            pts.push((b, p));
        }
    }
    pts.par_iter().map(|&(b, p)| g2_compare(&VacuumPoint::new(b, p)?)).collect()
}

pub fn g2_csv(rows: &[G2Comparison]) -> String {
    let mut s = String::from("beta2,p,G2_closed,G2_quadrature,rel_error\n");
    for r in rows {
        let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", r.beta2, r.p, r.closed, r.quadrature, r.rel_error);
    }
    s
}

/// Vacuum eigenvalues of I₁, I₃, I₅ (n = 1, 2, 3).
pub fn vacuum_local_im(vp: &VacuumPoint, n: u8) -> Result<f64> {
    let (h, c) = (vp.h, vp.c);
    let f6 = 720.0;
    let f9 = 362_880.0;
    match n {
        1 => Ok(h - c / 24.0),
        2 => Ok(h * h - (c + 2.0) * h / 12.0 + c * (5.0 * c + 22.0) / (4.0 * f6)),
        3 => Ok(h.powi(3) - (c + 4.0) * h * h / 8.0 + 5.0 * (c + 2.0) * (3.0 * c + 20.0) * h / (4.0 * f6)
            - 5.0 * c * (3.0 * c + 14.0) * (7.0 * c + 68.0) / (4.0 * f9)),
        _ => Err(Error::Usage(format!("local IM index {n} not in 1..=3"))),
    }
}

/// First term ϰ² ∫∫ dw dw̃/4π² e^{iN(w̃-w)} |2sin((w-w̃)/2)|^{-2β²} of the Coulomb-gas series.
pub fn coulomb_first_order(vp: &VacuumPoint, kappa: f64, n: i64) -> f64 {
    let b = vp.beta2;
    // the integrand depends on u = w - w̃ mod 2π only
    let integral = jacobi_on_circle(b, 0.0, 80, |u| (n as f64 * u).cos() * regular_factor(u, b));
    kappa * kappa * integral / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn vertex_examples() {
        let vp = VacuumPoint::new(0.3, 0.0).unwrap();
        let v = vertex_pair(PI, 0.0, 1, -1, &vp).unwrap();
        assert!((v - C64::new(2f64.powf(0.6), 0.0)).norm() < 1e-14);
        assert!(vertex_pair(1.0, 1.0, 1, 1, &vp).is_err());
        assert_eq!(vertex_pair(1.0, 1.0, 1, -1, &vp).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn vertex_conjugation_flips_p() {
        let a = VacuumPoint::new(0.3, 0.17).unwrap();
        let b = VacuumPoint::new(0.3, -0.17).unwrap();
        for (w, wt) in [(2.0, 0.5), (5.9, 0.1), (3.3, 3.2)] {
            for (e, et) in [(1, 1), (1, -1), (-1, 1)] {
                let x = vertex_pair(w, wt, e, et, &a).unwrap();
                let y = vertex_pair(w, wt, e, et, &b).unwrap();
                assert!((x.conj() - y).norm() < 1e-13);
                // swapping ε ↔ ε̃ together with w ↔ w̃ keeps the modulus and the p-phase
                let s = vertex_pair(wt, w, et, e, &a).unwrap();
                assert!((s.norm() - x.norm()).abs() < 1e-13 * x.norm());
            }
        }
    }

    #[test]
    fn g2_at_zero_and_symmetry() {
        let vp = VacuumPoint::new(0.25, 0.0).unwrap();
        let closed = g2_vacuum(&vp, G2Mode::Closed).unwrap();
        assert!(rel(closed, 4.0 * PI * PI * gamma(0.5).unwrap() / gamma(0.75).unwrap().powi(2)) < 1e-14);
        assert!(rel(g2_vacuum(&vp, G2Mode::Quadrature).unwrap(), closed) < 1e-10);
        let a = g2_closed(&VacuumPoint::new(0.3, 0.2).unwrap()).unwrap();
        let b = g2_closed(&VacuumPoint::new(0.3, -0.2).unwrap()).unwrap();
        assert!(rel(a, b) < 1e-14);
    }

    #[test]
    fn g2_spot_and_pole() {
        let c = g2_compare(&VacuumPoint::new(0.3, 0.15).unwrap()).unwrap();
        assert!(c.rel_error < 1e-6, "{c:?}");
        // 2p = 1 - β² + 1
        let vp = VacuumPoint::new(0.3, 0.85).unwrap();
        assert!(matches!(g2_vacuum(&vp, G2Mode::Closed), Err(Error::Resonance { .. })));
        assert!(VacuumPoint::new(0.3, -0.15).is_err());
        assert!(VacuumPoint::new(0.6, 0.1).is_err());
    }

    #[test]
    fn quadrature_independent_of_rule_size() {
        // a brute trapezoid on the smooth remainder would be the naive oracle; here
        // the Jacobi rule at 40 and 120 nodes must agree far below the tolerance
        let vp = VacuumPoint::new(0.45, 0.2).unwrap();
        assert!(rel(g2_quadrature(&vp, 40), g2_quadrature(&vp, 120)) < 1e-12);
    }

    #[test]
    fn g2_brute_force_oracle() {
        // plain midpoint on the original double integral with the singular strip cut out,
        // plus the strip integrated analytically at leading order
        let vp = VacuumPoint::new(0.1, 0.23).unwrap();
        let n = 4000;
        let h = 2.0 * PI / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * h;
            acc += (2.0 * PI - u) * 2.0 * (2.0 * PI * vp.p - 2.0 * vp.p * u).cos() / (2.0 * (u / 2.0).sin()).powf(0.2);
        }
        acc *= h;
        // midpoint on u^{-a} near 0 misses ∫₀^{h/2}… roughly; the mismatch is O(h^{1-2β²})
        let closed = g2_closed(&vp).unwrap();
        assert!(rel(acc, closed) < 5e-3, "{acc} {closed}");
    }

    #[test]
    fn local_im_examples() {
        let z = VacuumPoint::with_hc(0.0, 0.0);
        for n in 1..=3 {
            assert_eq!(vacuum_local_im(&z, n).unwrap(), 0.0);
        }
        let hh = VacuumPoint::with_hc(0.5, 0.5);
        assert!((vacuum_local_im(&hh, 1).unwrap() - (0.5 - 1.0 / 48.0)).abs() < 1e-15);
        // I₃ at h = 0 is its constant term
        let c = -22.0 / 5.0;
        let v = VacuumPoint::with_hc(0.0, c);
        assert!((vacuum_local_im(&v, 2).unwrap() - c * (5.0 * c + 22.0) / 2880.0).abs() < 1e-15);
        let x = VacuumPoint::new(0.3, 0.1).unwrap();
        assert_eq!(vacuum_local_im(&x, 3).unwrap(), vacuum_local_im(&x, 3).unwrap());
        assert!(vacuum_local_im(&x, 4).is_err());
    }

    #[test]
    fn coulomb_term() {
        let vp = VacuumPoint::new(0.3, 0.0).unwrap();
        let g0 = g2_closed(&vp).unwrap();
        let z0 = coulomb_first_order(&vp, 1.7, 0);
        assert!(rel(z0, 1.7f64.powi(2) * g0 / (4.0 * PI * PI)) < 1e-10);
        // ∫₀^{2π} cos(Nu) (2 sin(u/2))^{-2β²} du = (-1)^N 2π Γ(1-2β²)/(Γ(1-β²+N)Γ(1-β²-N))
        let b: f64 = 0.3;
        let g = |x: f64| gamma(x).unwrap();
        let exact = -2.0 * PI * g(1.0 - 2.0 * b) / (g(2.0 - b) * g(-b));
        let z1 = coulomb_first_order(&vp, 1.0, 1);
        assert!(rel(z1, exact / (2.0 * PI)) < 1e-10, "{z1} {}", exact / (2.0 * PI));
        assert!(coulomb_first_order(&vp, 1e-4, 2).abs() < 1e-7);
    }

    proptest::proptest! {
        #[test]
        fn lattice_closed_vs_quadrature(b in 0.05f64..0.45, t in -1.0f64..1.0) {
            let p = t * (1.0 - b - 0.05) / 2.0;
            let c = g2_compare(&VacuumPoint::new(b, p).unwrap()).unwrap();
            proptest::prop_assert!(c.rel_error < 1e-6, "{:?}", c);
        }
    }
}
