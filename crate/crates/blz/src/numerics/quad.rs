//! Gauss rules and adaptive Gauss–Kronrod integration.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Jacobi rule for weight (1-x)^a (1+x)^b on [-1, 1], via Golub–Welsch.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(a + b + 1.0)
        * (crate::numerics::ln_gamma(a + 1.0).unwrap() + crate::numerics::ln_gamma(b + 1.0).unwrap()
            - crate::numerics::ln_gamma(a + b + 2.0).unwrap())
        .exp();
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss–Kronrod on [a, b] to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(&f, a, b, tol, 40)
}

/// Sum of adaptive integrals over consecutive panels of width at most `panel`.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panel: f64, tol: f64) -> f64 {
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let w = (b - a) / n as f64;
    (0..n)
        .map(|i| integrate(&f, a + i as f64 * w, a + (i + 1) as f64 * w, tol / n as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_polynomials_exact() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_matches_beta_integral() {
        // ∫(1-x)^a (1+x)^b x^2 dx against a fine Legendre rule on the smooth case
        let (x, w) = gauss_jacobi(20, 0.5, 1.5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let exact = integrate(|x| (1.0 - x).powf(0.5) * (1.0 + x).powf(1.5) * x * x, -1.0, 1.0, 1e-13);
        assert!((s - exact).abs() < 1e-11, "{s} {exact}");
    }

    #[test]
    fn jacobi_singular_weight() {
        // ∫_{-1}^{1} (1+x)^{-0.6} dx = 2^{0.4}/0.4
        let (_, w) = gauss_jacobi(12, 0.0, -0.6);
        let s: f64 = w.iter().sum();
        assert!((s - 2f64.powf(0.4) / 0.4).abs() < 1e-12);
    }

    #[test]
    fn adaptive_oscillatory() {
        let v = integrate_panels(|x| (5.0 * x).cos() * (-x).exp(), 0.0, 40.0, 1.0, 1e-13);
        assert!((v - 1.0 / 26.0).abs() < 1e-12);
    }
}
