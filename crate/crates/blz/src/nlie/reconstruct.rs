use super::{NlieSolution, Variant};
use crate::error::{Error, Result};
use crate::kernels::{cached_lattice, f_rest_hat_shifted, tanh_c};
use crate::numerics::{gamma, interp_uniform_complex, FftConvolver, C64};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// h Σ f_j with half weights at the ends.
pub(crate) fn trapezoid(f: impl Iterator<Item = C64>, n: usize, h: f64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (j, v) in f.enumerate() {
        let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        s += v * w;
    }
    s * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptS {
    pub log_s: f64,
    pub value: f64,
    /// Γ(2k)/Γ(1-2k) 2^{4k-1} e^{η₀}, when η₀ is supplied.
    pub closed_form: Option<f64>,
}

/// log 𝒮(k) = α ∫ dθ/π Im log(1 + e^{-iε(θ-i0)}).
pub fn compute_script_s(sol: &NlieSolution, eta0: Option<f64>) -> Result<ScriptS> {
    if sol.variant != Variant::Massive {
        return Err(Error::Usage("𝒮(k) needs a massive solution".into()));
    }
    let n = sol.ell.len();
    let integral = trapezoid(sol.ell.iter().copied(), n, sol.grid.spacing());
    let log_s = sol.params.alpha / PI * integral.im;
    let closed_form = match eta0 {
        Some(e) => Some(closed_form_script_s(sol.params.k, e)?),
        None => None,
    };
    Ok(ScriptS { log_s, value: log_s.exp(), closed_form })
}

pub fn closed_form_script_s(k: f64, eta0: f64) -> Result<f64> {
    Ok(gamma(2.0 * k)? / gamma(1.0 - 2.0 * k)? * 2f64.powf(4.0 * k - 1.0) * eta0.exp())
}

/// F_PV(u + i·shift) + constant at offsets u = -(n-1)h ..= (n-1)h, with
/// F_PV(w) = (iα/4π) tanh(aw) + R(w), a = α/(α+1).
pub(crate) fn f_lattice(alpha: f64, n: usize, h: f64, shift: f64, constant: f64) -> Vec<C64> {
    let a = alpha / (alpha + 1.0);
    let rest = cached_lattice("f_rest", alpha, shift, n, h, |nu| C64::new(f_rest_hat_shifted(nu, alpha, shift), 0.0));
    let amp = C64::new(0.0, alpha / (4.0 * PI));
    rest.iter()
        .enumerate()
        .map(|(q, r)| {
            let u = C64::new((q as f64 - (n - 1) as f64) * h, shift);
            amp * tanh_c(a * u) + r + C64::new(0.0, constant)
        })
        .collect()
}

/// Q(θ, k) from a massive solution, anywhere in the complex plane.
///
/// On lines η < Im θ < 2τ - η (τ = π(α+1)/2α):
/// log Q(θ'+iτ) = (r/2c) cosh θ' + iπk + h(θ'), c = cos(π/2α), with
/// h(z) = -∫ F_PV(z-y+iη) ℓ(y) dy + ∫ F_PV(z-y-iη) conj ℓ(y) dy and ℓ the
/// stored log(1 + e^{-iε(y-iη)}). Near the real axis Q follows from the
/// T-Q relation with T_{1/2} built out of strip values; elsewhere from
/// real-analyticity and Q(θ+2iτ) = e^{2πik} Q(θ).
pub struct QReconstructor<'a> {
    sol: &'a NlieSolution,
    coef: f64,
    log_s: f64,
    margin: f64,
    lines: Mutex<HashMap<u64, Vec<C64>>>,
}

impl<'a> QReconstructor<'a> {
    pub fn new(sol: &'a NlieSolution) -> Result<Self> {
        if sol.variant != Variant::Massive {
            return Err(Error::Usage("Q reconstruction needs a massive solution".into()));
        }
        let c = (PI / (2.0 * sol.params.alpha)).cos();
        if c.abs() < 1e-8 {
            return Err(Error::Domain(format!(
                "leading coefficient r/(2cos(π/2α)) is singular at α = {}",
                sol.params.alpha
            )));
        }
        let log_s = compute_script_s(sol, None)?.log_s;
        let margin = 0.05f64.max(8.0 * sol.grid.spacing());
        Ok(Self { sol, coef: sol.params.r / (2.0 * c), log_s, margin, lines: Mutex::new(HashMap::new()) })
    }

    pub fn solution(&self) -> &NlieSolution {
        self.sol
    }

    pub fn tau(&self) -> f64 {
        self.sol.params.tau()
    }

    pub fn log_s(&self) -> f64 {
        self.log_s
    }

    /// r/(2 cos(π/2α)), the coefficient of cosh on the centre line.
    pub fn leading_coefficient(&self) -> f64 {
        self.coef
    }

    fn f_pv_lattice(&self, shift: f64) -> Vec<C64> {
        let g = &self.sol.grid;
        f_lattice(self.sol.params.alpha, g.n_points, g.spacing(), shift, 0.0)
    }

    /// h(x + iy) on every grid node, y measured from the centre line.
    pub fn h_line(&self, y: f64) -> Result<Vec<C64>> {
        let eta = self.sol.eta();
        if y.abs() + eta >= self.tau() - 1e-9 {
            return Err(Error::Domain(format!("line offset {y} leaves the strip")));
        }
        if let Some(v) = self.lines.lock().unwrap().get(&y.to_bits()) {
            return Ok(v.clone());
        }
        let n = self.sol.grid.n_points;
        let h = self.sol.grid.spacing();
        let up = FftConvolver::new(&self.f_pv_lattice(y + eta), n - 1, n);
        let down = FftConvolver::new(&self.f_pv_lattice(y - eta), n - 1, n);
        let conj: Vec<C64> = self.sol.ell.iter().map(|v| v.conj()).collect();
        let a = up.apply(&self.sol.ell);
        let b = down.apply(&conj);
        let line: Vec<C64> = a.iter().zip(&b).map(|(p, m)| (m - p) * h).collect();
        self.lines.lock().unwrap().insert(y.to_bits(), line.clone());
        Ok(line)
    }

    fn check_re(&self, x: f64) -> Result<()> {
        let g = &self.sol.grid;
        let pad = 12.0 * g.spacing();
        if x < g.theta_min + pad || x > g.theta_max - pad {
            return Err(Error::Domain(format!("Re θ = {x} outside the trusted grid interior")));
        }
        Ok(())
    }

    /// log Q at z with η < Im z < 2τ - η.
    pub fn log_q_strip(&self, z: C64) -> Result<C64> {
        let tau = self.tau();
        let y = z.im - tau;
        if y.abs() + self.sol.eta() >= tau - 1e-9 {
            return Err(Error::Domain(format!("Im θ = {} outside the reconstruction strip", z.im)));
        }
        self.check_re(z.re)?;
        let line = self.h_line(y)?;
        let g = &self.sol.grid;
        let hv = interp_uniform_complex(&line, g.theta_min, g.spacing(), z.re, 10);
        let k = self.sol.params.k;
        Ok(self.coef * C64::new(z.re, y).cosh() + C64::new(0.0, PI * k) + hv)
    }

    /// Q(θ, k) for complex θ.
    pub fn q(&self, z: C64) -> Result<C64> {
        if z.im < 0.0 {
            return Ok(self.q(z.conj())?.conj());
        }
        let tau = self.tau();
        let eta = self.sol.eta();
        let k = self.sol.params.k;
        let mut z = z;
        let mut phase = C64::new(1.0, 0.0);
        while z.im >= 2.0 * tau - eta - self.margin {
            z -= C64::new(0.0, 2.0 * tau);
            phase *= C64::new(0.0, 2.0 * PI * k).exp();
        }
        if z.im < 0.0 {
            return Ok(phase * self.q_near_real(z.conj())?.conj());
        }
        if z.im > eta + self.margin {
            return Ok(phase * self.log_q_strip(z)?.exp());
        }
        Ok(phase * self.q_near_real(z)?)
    }

    /// Q(w, -k) = Q(-w, k).
    pub fn q_minus(&self, z: C64) -> Result<C64> {
        self.q(-z)
    }

    /// T-Q relation Q(w) = [Q(w+iπξ) + Q(w-iπξ)] / T_{1/2}(w), 0 ≤ Im w small.
    fn q_near_real(&self, w: C64) -> Result<C64> {
        let k = self.sol.params.k;
        let s2 = (2.0 * PI * k).sin();
        if s2.abs() < 1e-6 {
            return Err(Error::Domain(format!(
                "T-Q route near the real axis degenerates at sin 2πk = {s2:.1e}"
            )));
        }
        let sh = C64::new(0.0, PI * self.sol.params.xi);
        let up = |v: C64| self.log_q_strip(v).map(|l| l.exp());
        let a = up(w + sh)?;
        let b = up(w.conj() + sh)?.conj();
        let qm_lo = up(-w + sh)?;
        let qm_hi = up(-w.conj() + sh)?.conj();
        let t = (a * qm_lo - b * qm_hi) / C64::new(0.0, 2.0 * s2);
        Ok((a + b) / t)
    }

    /// 2i sin(2πk) T_j(θ) = Q(θ+iπξ(j+½)) Q(-θ+iπξ(j+½)) - Q(θ-iπξ(j+½)) Q(-θ-iπξ(j+½)).
    pub fn t(&self, j: f64, theta: C64) -> Result<C64> {
        let k = self.sol.params.k;
        let cos_pl = (2.0 * PI * k).sin();
        if cos_pl.abs() < 1e-6 {
            return Err(Error::Domain("sin 2πk vanishes: T-functions undefined by the Wronskian formula".into()));
        }
        let sh = C64::new(0.0, PI * self.sol.params.xi * (j + 0.5));
        let p1 = self.q(theta + sh)? * self.q_minus(theta - sh)?;
        let p2 = self.q(theta - sh)? * self.q_minus(theta + sh)?;
        Ok((p1 - p2) / C64::new(0.0, 2.0 * cos_pl))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::massive;
    use super::*;
    use crate::kernels::kernel_f;
    use crate::numerics::quad;

    #[test]
    fn script_s_inverse_pair() {
        let a = compute_script_s(&massive(2.0, 0.1, 1.0), None).unwrap();
        let b = compute_script_s(&massive(2.0, -0.1, 1.0), None).unwrap();
        assert!((a.value * b.value - 1.0).abs() < 1e-7);
        let z = compute_script_s(&massive(2.0, 0.0, 1.0), None).unwrap();
        assert!((z.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn script_s_free_fermion_quadrature() {
        let (k, r) = (0.15, 0.8);
        let sol = massive(1.0, k, r);
        let s = compute_script_s(&sol, None).unwrap();
        // independent route: adaptive quadrature along Im θ = -0.4
        let d = -0.4;
        let f = |x: f64| {
            let e = -2.0 * PI * k + r * C64::new(x, d).sinh();
            (1.0 + (C64::new(0.0, -1.0) * e).exp()).ln().im
        };
        let direct = quad::integrate_panels(f, -12.0, 12.0, 0.25, 1e-13) / PI;
        assert!((s.log_s - direct).abs() < 1e-9, "{} {direct}", s.log_s);
    }

    #[test]
    fn kernel_term_matches_pointwise_quadrature() {
        // h(x) on the centre line, against kernel_f applied to real-axis data
        let (k, r) = (0.15, 0.8);
        assert!(QReconstructor::new(&massive(1.0, k, r)).is_err());
        let sol2 = massive(1.5, k, r);
        let rec = QReconstructor::new(&sol2).unwrap();
        let line = rec.h_line(0.0).unwrap();
        let g = &sol2.grid;
        let x = g.node(g.n_points / 2 + 37);
        let eta = sol2.eta();
        let mut acc = C64::new(0.0, 0.0);
        let h = g.spacing();
        let fpv = |t: C64| kernel_f(t, 1.5, 0.3).unwrap() - C64::new(0.0, 1.5 / (4.0 * PI));
        for j in 0..g.n_points {
            let l = sol2.ell[j];
            if l.norm() < 1e-15 {
                continue;
            }
            let y = g.node(j);
            acc += -fpv(C64::new(x - y, eta)) * l + fpv(C64::new(x - y, -eta)) * l.conj();
        }
        acc *= h;
        let idx = g.n_points / 2 + 37;
        assert!((acc - line[idx]).norm() < 1e-9, "{acc} {}", line[idx]);
    }

    #[test]
    fn q_real_on_real_axis_and_parity() {
        let sol = massive(2.0, 0.1, 1.0);
        let rec = QReconstructor::new(&sol).unwrap();
        let solm = massive(2.0, -0.1, 1.0);
        let recm = QReconstructor::new(&solm).unwrap();
        for &x in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
            let q = rec.q(C64::new(x, 0.0)).unwrap();
            assert!(q.im.abs() < 1e-7 * q.norm(), "{q}");
            let qm = recm.q(C64::new(-x, 0.0)).unwrap();
            assert!((q - qm).norm() < 1e-7 * q.norm(), "{q} {qm}");
        }
    }

    #[test]
    fn near_axis_route_joins_the_strip() {
        let sol = massive(2.0, 0.1, 1.0);
        let rec = QReconstructor::new(&sol).unwrap();
        let edge = sol.eta() + rec.margin;
        for &x in &[-0.7, 0.3, 1.1] {
            let below = rec.q(C64::new(x, edge - 1e-9)).unwrap();
            let above = rec.q(C64::new(x, edge + 1e-9)).unwrap();
            assert!((below - above).norm() < 1e-6 * above.norm(), "{below} {above}");
            assert!((rec.t(0.0, C64::new(x, 0.0)).unwrap() - 1.0).norm() < 1e-6);
        }
    }

    #[test]
    fn q_zeros_match_counting_function() {
        let sol = massive(2.0, 0.1, 1.0);
        let rec = QReconstructor::new(&sol).unwrap();
        let zs = super::super::find_zeros(&sol, -2, 2).unwrap();
        for (&n, &t) in &zs.theta {
            let f = |x: f64| rec.q(C64::new(x, 0.0)).unwrap().re;
            let (a, b) = (f(t - 0.05), f(t + 0.05));
            assert!(a * b < 0.0, "n={n}");
            let mut lo = t - 0.05;
            let mut hi = t + 0.05;
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if f(m) * a > 0.0 {
                    lo = m
                } else {
                    hi = m
                }
            }
            assert!((0.5 * (lo + hi) - t).abs() < 1e-6, "n={n}");
        }
    }
}
