//! Integral and closed-form kernels with explicit pole prescriptions.

use crate::error::{Error, Result};
use crate::numerics::{quad, C64};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    GMassive,
    FMassive,
    ScriptGConformal,
    SSoliton,
    SShift,
    PhiMinimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// α for the massive kernels, ξ for the rest.
    pub alpha_or_xi: f64,
    pub pole_offset: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, alpha_or_xi: f64) -> Result<Self> {
        let pole_offset = match family {
            KernelFamily::FMassive => 0.3 * alpha_or_xi.min(1.0),
            _ => 0.0,
        };
        Self::with_offset(family, alpha_or_xi, pole_offset)
    }

    pub fn with_offset(family: KernelFamily, alpha_or_xi: f64, pole_offset: f64) -> Result<Self> {
        if !(alpha_or_xi > 0.0) {
            return Err(Error::Domain(format!("kernel shape parameter must be positive, got {alpha_or_xi}")));
        }
        if family == KernelFamily::FMassive && !(pole_offset > 0.0 && pole_offset < alpha_or_xi.min(1.0)) {
            return Err(Error::Domain(format!(
                "pole offset {pole_offset} outside (0, {})",
                alpha_or_xi.min(1.0)
            )));
        }
        Ok(Self { family, alpha_or_xi, pole_offset })
    }

    /// Evaluate on the real axis. φ needs its two labels and goes through
    /// [`kernel_phi_minimal`] instead.
    pub fn eval(&self, theta: f64) -> Result<C64> {
        let p = self.alpha_or_xi;
        match self.family {
            KernelFamily::GMassive => Ok(C64::new(kernel_g(theta, p)?, 0.0)),
            KernelFamily::FMassive => kernel_f(C64::new(theta, 0.0), p, self.pole_offset),
            KernelFamily::ScriptGConformal => Ok(C64::new(kernel_script_g(theta, p)?, 0.0)),
            KernelFamily::SSoliton => soliton_amplitude(theta, p),
            KernelFamily::SShift => Ok(C64::new(kernel_s_shift(theta, p)?, 0.0)),
            KernelFamily::PhiMinimal => Err(Error::Usage("phi kernel needs (j, j') labels".into())),
        }
    }
}

/// sinh(a x)/sinh(c x) for c > 0, without overflow.
fn sinh_ratio(a: f64, c: f64, x: f64) -> f64 {
    let x = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    if x < 1e-300 {
        return a / c;
    }
    let aa = a.abs();
    a.signum() * ((aa - c) * x).exp() * (-(-2.0 * aa * x).exp_m1()) / (-(-2.0 * c * x).exp_m1())
}

/// 1/cosh(b x), without overflow.
fn sech(bx: f64) -> f64 {
    let y = bx.abs();
    2.0 * (-y).exp() / (1.0 + (-2.0 * y).exp())
}

/// Fourier transform of G: sinh(πν(1-α)/2α) / (2 cosh(πν/2) sinh(πν/2α)).
pub fn g_hat(nu: f64, alpha: f64) -> f64 {
    let a = PI * (1.0 - alpha) / (2.0 * alpha);
    let c = PI / (2.0 * alpha);
    0.5 * sinh_ratio(a, c, nu) * sech(PI * nu / 2.0)
}

/// Decay rate of |Ĝ(ν)| at large |ν|.
pub fn g_hat_decay(alpha: f64) -> f64 {
    PI * (1.0f64).min(1.0 / alpha)
}

/// 1/(4 cosh(πν/2) sinh(πν/2α)) at real ν ≠ 0.
pub fn f_hat(nu: f64, alpha: f64) -> f64 {
    let c = PI / (2.0 * alpha);
    let x = nu.abs();
    // 1/sinh(c x) = 2 e^{-cx}/(1-e^{-2cx})
    let inv_sinh = 2.0 * (-c * x).exp() / (-(-2.0 * c * x).exp_m1());
    0.25 * nu.signum() * inv_sinh * sech(PI * nu / 2.0)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Cosine transform (1/π)∫_0^Λ ĥ(ν) cos(νθ) dν with Λ set by the decay rate.
fn cosine_transform(hat: impl Fn(f64) -> f64, decay: f64, theta: f64) -> f64 {
    let cutoff = 38.0 / decay;
    let panel = (PI / (theta.abs() + 1.0)).min(1.0);
    quad::integrate_panels(|nu| hat(nu) * (nu * theta).cos(), 0.0, cutoff, panel, QUAD_TOL) / PI
}

/// G(θ) = ∫ dν/2π Ĝ(ν) e^{iνθ}; vanishes identically at α = 1.
pub fn kernel_g(theta: f64, alpha: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    if alpha == 1.0 {
        return Ok(0.0);
    }
    Ok(cosine_transform(|nu| g_hat(nu, alpha), g_hat_decay(alpha), theta))
}

/// Half-width of the strip where F converges.
pub fn f_strip(alpha: f64) -> f64 {
    0.5 * PI * (1.0 + 1.0 / alpha)
}

/// F(θ) = ∫ dν/2π e^{iνθ} / (4 cosh(πν/2) sinh(π(ν-i0)/2α)), integrated along Im ν = -δ₀.
pub fn kernel_f(theta: C64, alpha: f64, delta0: f64) -> Result<C64> {
    check_positive("alpha", alpha)?;
    let strip = f_strip(alpha);
    if theta.im.abs() >= strip {
        return Err(Error::Domain(format!(
            "Im θ = {} outside the strip |Im θ| < {strip}",
            theta.im
        )));
    }
    if !(delta0 > 0.0 && delta0 < alpha.min(1.0)) {
        return Err(Error::Domain(format!("contour offset {delta0} outside (0, {})", alpha.min(1.0))));
    }
    let integrand = |x: f64| -> C64 {
        let nu = C64::new(x, -delta0);
        let den = 4.0 * (PI * nu / 2.0).cosh() * (PI * nu / (2.0 * alpha)).sinh();
        (C64::i() * nu * theta).exp() / den / (2.0 * PI)
    };
    let margin = strip - theta.im.abs();
    // keep cosh·sinh below overflow
    let cutoff = (38.0 / margin).min(700.0 / strip);
    let panel = (PI / (theta.re.abs() + 1.0)).min(0.5);
    let re = quad::integrate_panels(|x| integrand(x).re, -cutoff, cutoff, panel, QUAD_TOL);
    let im = quad::integrate_panels(|x| integrand(x).im, -cutoff, cutoff, panel, QUAD_TOL);
    Ok(C64::new(re, im))
}

/// sinh(πν(1-ξ)/2) / (cosh(πν/2) sinh(πνξ/2)) = -2Ĝ(ν; 1/ξ).
fn soliton_ratio(nu: f64, xi: f64) -> f64 {
    -2.0 * g_hat(nu, 1.0 / xi)
}

/// Soliton-soliton amplitude S(θ), unit modulus on the real axis.
///
/// The ν-integral is taken over the half line; written with the decaying
/// (1-ξ) integrand this is S(θ) = -exp[-i∫_0^∞ dν/ν sin(νθ) sinh(πν(1-ξ)/2)/(cosh(πν/2) sinh(πνξ/2))]
/// for θ ≠ 0 and S(0) = 1 on the nose.
pub fn soliton_amplitude(theta: f64, xi: f64) -> Result<C64> {
    check_positive("xi", xi)?;
    if theta == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let decay = g_hat_decay(1.0 / xi);
    let cutoff = 38.0 / decay;
    let panel = (PI / (theta.abs() + 1.0)).min(1.0);
    let phase = quad::integrate_panels(
        |nu| {
            if nu == 0.0 {
                theta * soliton_ratio(0.0, xi)
            } else {
                (nu * theta).sin() / nu * soliton_ratio(nu, xi)
            }
        },
        0.0,
        cutoff,
        panel,
        QUAD_TOL,
    );
    Ok(-C64::new(0.0, -phase).exp())
}

/// Smooth part of (1/2πi) ∂_θ log S(θ), from the differentiated exponent.
pub fn kernel_script_g(theta: f64, xi: f64) -> Result<f64> {
    check_positive("xi", xi)?;
    let decay = g_hat_decay(1.0 / xi);
    Ok(-0.5 * cosine_transform(|nu| soliton_ratio(nu, xi), decay, theta))
}

/// s(θ) = 1/(ξ cosh(θ/ξ)).
pub fn kernel_s_shift(theta: f64, xi: f64) -> Result<f64> {
    check_positive("xi", xi)?;
    Ok(sech(theta / xi) / xi)
}

/// -i ∂_θ log F_a(θ) for F_a = (sinh θ + i sin πaξ)/(sinh θ - i sin πaξ).
pub fn phi_block(a: f64, theta: f64, xi: f64) -> f64 {
    let s = (PI * a * xi).sin();
    if s == 0.0 {
        return 0.0;
    }
    let sh = theta.sinh();
    -2.0 * s * theta.cosh() / (sh * sh + s * s)
}

fn half_integer(name: &str, j: f64) -> Result<usize> {
    let two_j = 2.0 * j;
    if two_j < 1.0 || (two_j - two_j.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!("{name} = {j} is not a positive half-integer")));
    }
    Ok(two_j.round() as usize)
}

/// φ_{jj'}(θ) = -i ∂_θ log S_{jj'}(θ), S_{jj'} = F_{j+j'} F_{|j-j'|} ∏_{k=1}^{2min(j,j')-1} F²_{|j-j'|+k}.
pub fn kernel_phi_minimal(j: f64, jp: f64, theta: f64, xi: f64) -> Result<f64> {
    let tj = half_integer("j", j)?;
    let tjp = half_integer("j'", jp)?;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("xi = {xi} outside (0, 1)")));
    }
    let sum = 0.5 * (tj + tjp) as f64;
    let diff = 0.5 * (tj as f64 - tjp as f64).abs();
    let mut v = phi_block(sum, theta, xi) + phi_block(diff, theta, xi);
    for k in 1..tj.min(tjp) {
        v += 2.0 * phi_block(diff + k as f64, theta, xi);
    }
    Ok(v)
}

fn ln_inv_sinh(c: f64, x: f64) -> f64 {
    // ln(1/sinh(cx)), x > 0
    std::f64::consts::LN_2 - c * x - (-(-2.0 * c * x).exp_m1()).ln()
}

fn ln_sech(b: f64, x: f64) -> f64 {
    std::f64::consts::LN_2 - b * x - (-2.0 * b * x).exp().ln_1p()
}

const DIRECT_LIMIT: f64 = 20.0;

/// Ĝ(ν) e^{-νy}, safe for large |ν|.
pub fn g_hat_shifted(nu: f64, alpha: f64, y: f64) -> f64 {
    if nu.abs() <= DIRECT_LIMIT {
        return g_hat(nu, alpha) * (-nu * y).exp();
    }
    let a = PI * (1.0 - alpha) / (2.0 * alpha);
    if a == 0.0 {
        return 0.0;
    }
    let c = PI / (2.0 * alpha);
    let x = nu.abs();
    let aa = a.abs();
    let ln = 0.5f64.ln() + (aa - c) * x + (-(-2.0 * aa * x).exp_m1()).ln() - (-(-2.0 * c * x).exp_m1()).ln()
        + ln_sech(PI / 2.0, x);
    a.signum() * (ln - nu * y).exp()
}

/// Slope at ν = 0 of the remainder R̂ = F̂ - α/(4a sinh(πν/2a)), a = α/(α+1).
fn rest_slope(alpha: f64) -> f64 {
    PI * (1.0 - alpha) / 24.0
}

/// R̂(ν) e^{-νy}, where F_PV(θ) = (iα/4π) tanh(aθ) + R(θ), a = α/(α+1).
pub fn f_rest_hat_shifted(nu: f64, alpha: f64, y: f64) -> f64 {
    let a = alpha / (alpha + 1.0);
    let d = PI / (2.0 * a);
    let x = nu.abs();
    if x < 1e-4 {
        return nu * rest_slope(alpha) * (-nu * y).exp();
    }
    let c = PI / (2.0 * alpha);
    let ln_f = 0.25f64.ln() + ln_inv_sinh(c, x) + ln_sech(PI / 2.0, x);
    let ln_t = (alpha / (4.0 * a)).ln() + ln_inv_sinh(d, x);
    if x <= DIRECT_LIMIT {
        return nu.signum() * (ln_f.exp() - ln_t.exp()) * (-nu * y).exp();
    }
    nu.signum() * ((ln_f - nu * y).exp() - (ln_t - nu * y).exp())
}

/// R̂(ν) e^{-νy}/(iν): transform of ∫_{-∞}^θ R.
pub fn f_rest_int_hat_shifted(nu: f64, alpha: f64, y: f64) -> C64 {
    if nu.abs() < 1e-4 {
        return C64::new(0.0, -rest_slope(alpha) * (-nu * y).exp());
    }
    C64::new(0.0, -f_rest_hat_shifted(nu, alpha, y) / nu)
}

/// [Ĝ(ν) - Ĝ(0)(πν/2)/sinh(πν/2)] e^{-νy}/(iν): transform of ∫_{-∞}^θ G minus
/// Ĝ(0)(1 + tanh θ)/2.
pub fn g_rest_int_hat_shifted(nu: f64, alpha: f64, y: f64) -> C64 {
    let x = nu.abs();
    if x < 1e-6 {
        return C64::new(0.0, 0.0);
    }
    let g0 = g_hat(0.0, alpha);
    let ln_s = (PI * x / 2.0).ln() + ln_inv_sinh(PI / 2.0, x);
    let step = g0 * (ln_s - nu * y).exp();
    C64::new(0.0, -(g_hat_shifted(nu, alpha, y) - step) / nu)
}

/// tanh for complex arguments, stable at large |Re w|.
pub fn tanh_c(w: C64) -> C64 {
    let (s, w) = if w.re < 0.0 { (-1.0, -w) } else { (1.0, w) };
    let e = (-2.0 * w).exp();
    s * (1.0 - e) / (1.0 + e)
}

/// log(2 cosh w) on the principal branch, for |Im w| < π/2.
pub fn ln_2cosh_c(w: C64) -> C64 {
    let w = if w.re < 0.0 { -w } else { w };
    w + (-2.0 * w).exp().ln_1p_c()
}

trait Ln1p {
    fn ln_1p_c(self) -> C64;
}

impl Ln1p for C64 {
    fn ln_1p_c(self) -> C64 {
        if self.norm() < 1e-8 {
            self - self * self / 2.0
        } else {
            (1.0 + self).ln()
        }
    }
}

/// Samples of K(x) = ∫ dν/2π K̂(ν) e^{iνx} at x = m h, m = -(n-1)..=(n-1),
/// by an inverse FFT over a period of at least 8 n h.
pub fn fourier_lattice(hat: impl Fn(f64) -> C64, n: usize, h: f64) -> Vec<C64> {
    let m = (8 * n).next_power_of_two();
    let period = m as f64 * h;
    let dnu = 2.0 * PI / period;
    let mut buf: Vec<C64> = (0..m)
        .map(|q| {
            let qs = if q < m / 2 { q as f64 } else { q as f64 - m as f64 };
            hat(qs * dnu)
        })
        .collect();
    // Nyquist bin: average of ±π/h
    buf[m / 2] = 0.5 * (hat(-PI / h) + hat(PI / h));
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / period;
    (0..2 * n - 1)
        .map(|q| {
            let off = q as isize - (n as isize - 1);
            let idx = if off >= 0 { off as usize } else { (m as isize + off) as usize };
            buf[idx] * scale
        })
        .collect()
}

/// [`fourier_lattice`] through the directory named by `BLZ_KERNEL_CACHE`, when set.
/// Entries are keyed by `tag` and the bit patterns of `(alpha, shift, h)` and `n`;
/// an unreadable or short entry is recomputed and rewritten.
pub fn cached_lattice(tag: &str, alpha: f64, shift: f64, n: usize, h: f64, hat: impl Fn(f64) -> C64) -> Vec<C64> {
    let Some(dir) = std::env::var_os("BLZ_KERNEL_CACHE") else {
        return fourier_lattice(hat, n, h);
    };
    let name = format!("{tag}-{:016x}-{:016x}-{:016x}-{n}.bin", alpha.to_bits(), shift.to_bits(), h.to_bits());
    let path = std::path::Path::new(&dir).join(name);
    if let Ok(bytes) = std::fs::read(&path) {
        if bytes.len() == 16 * (2 * n - 1) {
            let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
            return bytes.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect();
        }
    }
    let lat = fourier_lattice(hat, n, h);
    let bytes: Vec<u8> = lat.iter().flat_map(|z| z.re.to_le_bytes().into_iter().chain(z.im.to_le_bytes())).collect();
    // a failed write only costs a recomputation next time
    let _ = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, bytes));
    lat
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g_vanishes_at_free_fermion_point() {
        assert_eq!(kernel_g(0.7, 1.0).unwrap(), 0.0);
        for i in 0..50 {
            assert!(g_hat(i as f64 * 0.3, 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn g_closed_form_alpha_two() {
        // Ĝ = -1/(2 cosh(πν/2)) at α = 2, so G = -1/(2π cosh θ)
        for &t in &[0.0, 0.4, 1.7, 5.0] {
            let g = kernel_g(t, 2.0).unwrap();
            assert!((g + 1.0 / (2.0 * PI * t.cosh())).abs() < 1e-12, "{t}");
        }
    }

    /// Residue sum of the G integral, closing in the upper half plane (θ > 0).
    fn g_residues(theta: f64, alpha: f64) -> f64 {
        let mut s = 0.0;
        for n in 0..60 {
            let nu = (2 * n + 1) as f64;
            // pole of 1/cosh(πν/2) at iν
            let num = (PI * nu * (1.0 - alpha) / (2.0 * alpha)).sin();
            let den = 2.0 * (PI * nu / (2.0 * alpha)).sin() * (PI / 2.0) * (PI * nu / 2.0).sin();
            s += -num / den * (-nu * theta).exp();
        }
        for m in 1.. {
            let nu = 2.0 * alpha * m as f64;
            if nu > 120.0 {
                break;
            }
            let num = (PI * nu * (1.0 - alpha) / (2.0 * alpha)).sin();
            let den = 2.0 * (PI * nu / 2.0).cos() * (PI / (2.0 * alpha)) * (PI * m as f64).cos();
            s += num / den * (-nu * theta).exp();
        }
        -s
    }

    #[test]
    fn g_matches_residue_series() {
        for &alpha in &[2.0, 1.63, 3.17, 0.643] {
            for &t in &[0.3, 1.0, 2.5] {
                let q = kernel_g(t, alpha).unwrap();
                let r = g_residues(t, alpha);
                assert!((q - r).abs() < 1e-10, "α={alpha} θ={t}: {q} vs {r}");
            }
        }
    }

    #[test]
    fn f_contour_independent() {
        let a = kernel_f(C64::new(1.0, 0.0), 2.0, 0.2).unwrap();
        let b = kernel_f(C64::new(1.0, 0.0), 2.0, 0.4).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} {b}");
        let c = kernel_f(C64::new(-0.6, 0.9), 2.0, 0.3).unwrap();
        let d = kernel_f(C64::new(-0.6, 0.9), 2.0, 0.6).unwrap();
        assert!((c - d).norm() < 1e-10);
    }

    #[test]
    fn f_pole_symmetry() {
        // F(θ) + F(-θ) = iα/2π, the residue of the ν = 0 pole
        for &alpha in &[2.0, 0.7] {
            for &t in &[0.2, 1.1, 3.0] {
                let s = kernel_f(C64::new(t, 0.0), alpha, 0.25).unwrap()
                    + kernel_f(C64::new(-t, 0.0), alpha, 0.25).unwrap();
                assert!((s - C64::new(0.0, alpha / (2.0 * PI))).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn f_tail_decay_rate() {
        // oscillatory part of F beyond the constant iα/2π decays like e^{-min(1,2α)θ}
        for &alpha in &[2.0, 0.3] {
            let c = C64::new(0.0, alpha / (2.0 * PI));
            let a = (kernel_f(C64::new(9.0, 0.0), alpha, 0.2).unwrap() - c).norm();
            let b = (kernel_f(C64::new(12.0, 0.0), alpha, 0.2).unwrap() - c).norm();
            let slope = (a / b).ln() / 3.0;
            assert!((slope - 1f64.min(2.0 * alpha)).abs() < 0.02, "{slope}");
        }
    }

    #[test]
    fn f_outside_strip_rejected() {
        assert!(kernel_f(C64::new(0.0, 2.5), 2.0, 0.2).is_err());
    }

    #[test]
    fn soliton_unitarity_and_oddness() {
        assert_eq!(soliton_amplitude(0.0, 0.5).unwrap(), C64::new(1.0, 0.0));
        for &t in &[0.3, 1.7, -2.4] {
            let s = soliton_amplitude(t, 0.5).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let m = soliton_amplitude(-t, 0.5).unwrap();
            assert!((s * m - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn script_g_finite_difference() {
        let xi = 0.5;
        let t = 0.9;
        let d = 1e-4;
        let ph = |t: f64| soliton_amplitude(t, xi).unwrap().arg();
        let fd = (ph(t + d) - ph(t - d)) / (2.0 * d) / (2.0 * PI);
        let k = kernel_script_g(t, xi).unwrap();
        assert!((fd - k).abs() < 1e-6, "{fd} {k}");
    }

    #[test]
    fn script_g_integral_is_transform_at_zero() {
        let xi = 0.4;
        let total = quad::integrate_panels(|t| kernel_script_g(t, xi).unwrap(), -30.0, 30.0, 1.0, 1e-11);
        // transform at ν = 0 is -½ × (1-ξ)/ξ
        let expect = -0.5 * (1.0 - xi) / xi;
        assert!((total - expect).abs() < 1e-8, "{total} {expect}");
    }

    #[test]
    fn s_shift_normalized() {
        let xi = 0.37;
        assert!((kernel_s_shift(0.0, xi).unwrap() - 1.0 / xi).abs() < 1e-15);
        let total = quad::integrate_panels(|t| kernel_s_shift(t, xi).unwrap(), -40.0, 40.0, 0.5, 1e-13);
        assert!((total / PI - 1.0).abs() < 1e-11);
    }

    #[test]
    fn phi_block_finite_difference() {
        let (a, xi, t) = (0.5, 0.4, 0.6);
        let s = (PI * a * xi).sin();
        let phase = |t: f64| {
            let f = C64::new(f64::sinh(t), s) / C64::new(f64::sinh(t), -s);
            f.arg()
        };
        let d = 1e-5;
        // -i ∂ log F = ∂ arg F
        let fd = (phase(t + d) - phase(t - d)) / (2.0 * d);
        assert!((fd - phi_block(a, t, xi)).abs() < 1e-7, "{fd}");
    }

    #[test]
    fn phi_symmetric_and_bad_labels() {
        for &(j, jp) in &[(0.5, 1.0), (1.5, 1.0), (2.0, 0.5)] {
            let a = kernel_phi_minimal(j, jp, 0.8, 0.3).unwrap();
            let b = kernel_phi_minimal(jp, j, 0.8, 0.3).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        assert!(kernel_phi_minimal(0.25, 1.0, 0.0, 0.3).is_err());
    }

    #[test]
    fn lattice_matches_quadrature() {
        let alpha = 2.7;
        let h = 0.05;
        let lat = fourier_lattice(|nu| C64::new(g_hat(nu, alpha), 0.0), 200, h);
        for &q in &[0usize, 150, 199, 260, 398] {
            let x = (q as f64 - 199.0) * h;
            let direct = kernel_g(x, alpha).unwrap();
            assert!((lat[q].re - direct).abs() < 1e-11, "{x}");
        }
    }


    #[test]
    fn shifted_transforms_match_direct() {
        for &nu in &[0.5, 3.0, 19.0, 25.0, 60.0, -33.0] {
            for &y in &[0.0, 0.4, -0.7] {
                let a = g_hat_shifted(nu, 2.3, y);
                let b = g_hat(nu, 2.3) * (-nu * y).exp();
                assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300), "{nu} {y}");
                let r = f_rest_hat_shifted(nu, 2.3, y);
                let a_ = 2.3 / 3.3;
                let direct = (f_hat(nu, 2.3) - 2.3 / (4.0 * a_ * (PI * nu / (2.0 * a_)).sinh())) * (-nu * y).exp();
                assert!((r - direct).abs() <= 1e-12 * (f_hat(nu, 2.3) * (-nu * y).exp()).abs() + 1e-300);
            }
        }
        // small-ν slope of the rest transform
        let nu = 2e-3;
        let a_ = 2.3 / 3.3;
        let direct = f_hat(nu, 2.3) - 2.3 / (4.0 * a_ * (PI * nu / (2.0 * a_)).sinh());
        assert!((direct / nu - PI * (1.0 - 2.3) / 24.0).abs() < 1e-5);
    }

    #[test]
    fn f_pv_split_reproduces_f() {
        // F(θ) = iα/4π + (iα/4π) tanh(aθ) + R(θ) with R from its lattice
        let alpha = 2.0;
        let h = 0.02;
        let n = 400;
        let rl = fourier_lattice(|nu| C64::new(f_rest_hat_shifted(nu, alpha, 0.3), 0.0), n, h);
        let a = alpha / (alpha + 1.0);
        for &q in &[n - 1, n + 50, n - 120, n + 300] {
            let t = C64::new((q as f64 - (n - 1) as f64) * h, 0.3);
            let split = C64::new(0.0, alpha / (4.0 * PI)) * (1.0 + tanh_c(a * t)) + rl[q];
            let direct = kernel_f(t, alpha, 0.3).unwrap();
            assert!((split - direct).norm() < 1e-11, "{t}: {split} {direct}");
        }
    }

    #[test]
    fn complex_helpers_stable() {
        let w = C64::new(400.0, 0.3);
        assert!((tanh_c(w) - 1.0).norm() < 1e-15);
        assert!((tanh_c(-w) + 1.0).norm() < 1e-15);
        let v = C64::new(0.7, 0.2);
        assert!((ln_2cosh_c(v) - (2.0 * v.cosh()).ln()).norm() < 1e-14);
        assert!((ln_2cosh_c(w) - w).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn kernels_even(t in 0.0f64..6.0, alpha in 0.3f64..4.0, xi in 0.05f64..0.95) {
            prop_assert!((kernel_g(t, alpha).unwrap() - kernel_g(-t, alpha).unwrap()).abs() < 1e-10);
            prop_assert!((kernel_s_shift(t, xi).unwrap() - kernel_s_shift(-t, xi).unwrap()).abs() < 1e-12);
            prop_assert!((kernel_script_g(t, xi).unwrap() - kernel_script_g(-t, xi).unwrap()).abs() < 1e-10);
            prop_assert!((kernel_phi_minimal(1.0, 0.5, t, xi).unwrap() - kernel_phi_minimal(1.0, 0.5, -t, xi).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn soliton_phase_odd(t in 0.01f64..5.0, xi in 0.1f64..0.9) {
            let s = soliton_amplitude(t, xi).unwrap();
            let m = soliton_amplitude(-t, xi).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-9);
            prop_assert!((s - m.conj()).norm() < 1e-9);
        }

        #[test]
        fn f_two_offsets(t in -3.0f64..3.0) {
            let a = kernel_f(C64::new(t, 0.0), 2.0, 0.15).unwrap();
            let b = kernel_f(C64::new(t, 0.0), 2.0, 0.3).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}
