use super::C64;
use crate::error::{Error, Result};
use std::f64::consts::PI;

// B_{2k} / (2k (2k-1)), k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const SHIFT: f64 = 15.0;

fn stirling(z: C64) -> C64 {
    let ln_z = z.ln();
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = C64::new(0.0, 0.0);
    for c in STIRLING {
        series += term * c;
        term *= inv2;
    }
    (z - 0.5) * ln_z - z + 0.5 * (2.0 * PI).ln() + series
}

/// Principal branch of log Γ(z).
///
/// Real arguments below 1/2 go through the reflection formula; the imaginary
/// part is then iπ when Γ(x) < 0. Complex arguments are shifted into the
/// Stirling region with the recurrence, which keeps the branch cut on the
/// negative real axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("log_gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!("Γ has a pole at z = {}", z.re)));
    }
    if z.im == 0.0 && z.re < 0.5 {
        let x = z.re;
        let s = (PI * x).sin();
        let rest = log_gamma(C64::new(1.0 - x, 0.0))?.re;
        let re = PI.ln() - s.abs().ln() - rest;
        let im = if s < 0.0 { PI } else { 0.0 };
        return Ok(C64::new(re, im));
    }
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re < SHIFT {
        acc += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - acc)
}

/// log Γ(x) for real x, returning log|Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(C64::new(x, 0.0))?.re)
}

/// Γ(x) for real x.
pub fn gamma(x: f64) -> Result<f64> {
    let lg = log_gamma(C64::new(x, 0.0))?;
    Ok(lg.re.exp() * lg.im.cos().signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_values() {
        assert!(log_gamma(C64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(C64::new(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-14);
        let five = log_gamma(C64::new(5.0, 0.0)).unwrap();
        assert!((five.re - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn poles_are_named() {
        let e = log_gamma(C64::new(-3.0, 0.0)).unwrap_err();
        assert!(e.to_string().contains("-3"));
        assert!(log_gamma(C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn negative_half_integers() {
        // Γ(-1/2) = -2√π, Γ(-3/2) = 4√π/3
        assert!((gamma(-0.5).unwrap() / (-2.0 * PI.sqrt()) - 1.0).abs() < 1e-13);
        assert!((gamma(-1.5).unwrap() / (4.0 * PI.sqrt() / 3.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn large_argument_factorial() {
        // log 40! by summation
        let exact: f64 = (1..=40).map(|k| (k as f64).ln()).sum();
        let v = ln_gamma(41.0).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn complex_reflection_identity() {
        // Γ(z)Γ(1-z) = π / sin(πz)
        for &(x, y) in &[(0.3, 0.7), (-2.2, 1.1), (0.1, -4.0), (-7.5, 0.2)] {
            let z = C64::new(x, y);
            let lhs = (log_gamma(z).unwrap() + log_gamma(1.0 - z).unwrap()).exp();
            let rhs = PI / (PI * z).sin();
            assert!((lhs - rhs).norm() / rhs.norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn conjugation_and_branch() {
        let z = C64::new(-3.7, 2.5);
        let a = log_gamma(z).unwrap();
        let b = log_gamma(z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        // principal branch: continuous across the positive real axis
        let up = log_gamma(C64::new(2.5, 1e-9)).unwrap();
        let dn = log_gamma(C64::new(2.5, -1e-9)).unwrap();
        assert!((up - dn).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn recurrence(x in -20.0f64..40.0, y in -10.0f64..10.0) {
            let z = C64::new(x, y);
            prop_assume!(z.norm() > 0.05 && (z + 1.0).norm() > 0.05 && y.abs() > 1e-3);
            let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
            // equal up to a multiple of 2πi
            let k = (d.im / (2.0 * PI)).round();
            let r = d - C64::new(0.0, 2.0 * PI * k);
            prop_assert!(r.norm() < 1e-12);
        }

        #[test]
        fn real_recurrence(x in 0.01f64..45.0) {
            let d = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - x.ln();
            prop_assert!(d.abs() < 1e-12);
        }
    }
}
