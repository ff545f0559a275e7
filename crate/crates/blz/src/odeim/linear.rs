//! The auxiliary linear problem along rays and arcs, and the spectral determinants.
//!
//! Along a ray of angle φ, in t = log ρ: dΨ/dt = [[iη_φ/2, b], [c, -iη_φ/2]] Ψ with
//! b = e^t (e^{iφ+θ̃+η} + e^{-iφ-θ̃} p̄ e^{-η}),  c = e^t (e^{iφ+θ̃} p e^{-η} + e^{-iφ-θ̃+η}).
//! Along an arc at fixed t: dΨ/dφ = [[-iη_t/2, i(z e^{θ̃+η} - z̄ e^{-θ̃} p̄ e^{-η})],
//! [i(z e^{θ̃} p e^{-η} - z̄ e^{-θ̃+η}), iη_t/2]] Ψ.

use super::mshg::{far_radius, MshgSolution};
use crate::error::{Error, Result};
use crate::numerics::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type M2 = [[C64; 2]; 2];

/// A 2-vector v e^{log_scale} with |v| = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub v: [C64; 2],
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(v: [C64; 2], log_scale: f64) -> Self {
        let mut s = Self { v, log_scale };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let n = (self.v[0].norm_sqr() + self.v[1].norm_sqr()).sqrt();
        if n > 0.0 && n.is_finite() {
            self.v = [self.v[0] / n, self.v[1] / n];
            self.log_scale += n.ln();
        }
    }

    pub fn value(&self) -> [C64; 2] {
        let e = self.log_scale.exp();
        [self.v[0] * e, self.v[1] * e]
    }
}

/// det(a, b) with a, b as columns.
pub fn det(a: &Scaled, b: &Scaled) -> C64 {
    (a.v[0] * b.v[1] - a.v[1] * b.v[0]) * (a.log_scale + b.log_scale).exp()
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

fn matvec(g: &M2, y: &[C64; 2]) -> [C64; 2] {
    [g[0][0] * y[0] + g[0][1] * y[1], g[1][0] * y[0] + g[1][1] * y[1]]
}

/// Dormand–Prince 5(4) for y' = G(x) y, renormalizing after every step.
fn dopri(gen: &dyn Fn(f64) -> M2, x0: f64, x1: f64, y0: Scaled, rtol: f64) -> Result<Scaled> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut y = y0;
    y.normalize();
    let mut x = x0;
    let g0 = gen(x0);
    let gnorm = g0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = dir * (0.05 / (1.0 + gnorm)).min(span.abs());
    let mut k1 = matvec(&g0, &y.v);
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let mut k = [[C64::new(0.0, 0.0); 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y.v;
            for (q, kq) in k.iter().enumerate().take(s) {
                let a = A[s][q] * h;
                if a != 0.0 {
                    ys[0] += kq[0] * a;
                    ys[1] += kq[1] * a;
                }
            }
            k[s] = matvec(&gen(x + C[s] * h), &ys);
        }
        let mut y5 = y.v;
        let mut err = [C64::new(0.0, 0.0); 2];
        for s in 0..7 {
            for c in 0..2 {
                if s < 6 {
                    y5[c] += k[s][c] * (A[6][s] * h);
                }
                err[c] += k[s][c] * (E[s] * h);
            }
        }
        let scale = rtol * (1.0 + (y5[0].norm_sqr() + y5[1].norm_sqr()).sqrt());
        let en = err[0].norm().max(err[1].norm()) / scale;
        if !en.is_finite() {
            return Err(Error::Accuracy("linear problem integration produced non-finite values".into()));
        }
        if en <= 1.0 {
            x += h;
            let n = (y5[0].norm_sqr() + y5[1].norm_sqr()).sqrt();
            y = Scaled { v: [y5[0] / n, y5[1] / n], log_scale: y.log_scale + n.ln() };
            k1 = [k[6][0] / n, k[6][1] / n];
            steps += 1;
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 * (1.0 + x.abs()) || steps > 5_000_000 {
            return Err(Error::Accuracy(format!("step size collapse at x = {x}")));
        }
    }
    Ok(y)
}

pub const DEFAULT_RTOL: f64 = 1e-12;

/// Generator along the ray φ.
fn radial(sol: &MshgSolution, th: C64, phi: f64) -> impl Fn(f64) -> M2 + '_ {
    let a = sol.alpha;
    let sigma = sol.sigma();
    move |t: f64| {
        let e = sol.eval(t, phi);
        let rho = t.exp();
        let z = C64::from_polar(1.0, phi) * th.exp();
        let zi = C64::new(1.0, 0.0) / z;
        let p = C64::from_polar(rho.powf(2.0 * a), 2.0 * a * phi) - sigma;
        let (ep, em) = (e.eta.exp(), (-e.eta).exp());
        let b = (z * ep + zi * p.conj() * em) * rho;
        let c = (z * p * em + zi * ep) * rho;
        let d = i() * (e.eta_phi / 2.0);
        [[d, b], [c, -d]]
    }
}

/// Generator along the arc at t.
fn angular(sol: &MshgSolution, th: C64, t: f64) -> impl Fn(f64) -> M2 + '_ {
    let a = sol.alpha;
    let sigma = sol.sigma();
    let rho = t.exp();
    move |phi: f64| {
        let e = sol.eval(t, phi);
        let z = C64::from_polar(rho, phi);
        let p = C64::from_polar(rho.powf(2.0 * a), 2.0 * a * phi) - sigma;
        let (et, emt) = (th.exp(), (-th).exp());
        let (ep, em) = (e.eta.exp(), (-e.eta).exp());
        let up = i() * (z * et * ep - z.conj() * emt * p.conj() * em);
        let lo = i() * (z * et * p * em - z.conj() * emt * ep);
        let d = i() * (e.eta_t / 2.0);
        [[-d, up], [lo, d]]
    }
}

/// The decaying solution where η = ¼ log|p|² holds exactly:
/// ((p̄/p)^{1/8}, -(p/p̄)^{1/8}) exp(-e^{θ̃} w - e^{-θ̃} w̄), w = ∫√p dz normalized at infinity.
pub fn xi_minus_far(sol: &MshgSolution, th: C64, t: f64, phi: f64) -> Scaled {
    let a = sol.alpha;
    let rho = t.exp();
    let q = C64::from_polar(sol.sigma() * rho.powf(-2.0 * a), -2.0 * a * phi);
    let psi = 2.0 * a * phi + (C64::new(1.0, 0.0) - q).arg();
    // √(1-u) = 1 - Σ a_n u^n, integrated term by term
    let mut an = 0.5;
    let mut qn = q;
    let mut sum = C64::new(0.0, 0.0);
    for n in 1..200 {
        let term = qn * (an / (2.0 * a * n as f64 - a - 1.0));
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
        an *= (2.0 * n as f64 - 1.0) / (2.0 * n as f64 + 2.0);
        qn *= q;
    }
    let w = C64::from_polar(rho.powf(a + 1.0), (a + 1.0) * phi) * (1.0 / (a + 1.0) + sum);
    let ex = th.exp() * w + (-th).exp() * w.conj();
    let ph = C64::from_polar(1.0, -ex.im);
    Scaled::new([C64::from_polar(1.0, -psi / 4.0) * ph, -C64::from_polar(1.0, psi / 4.0) * ph], -ex.re)
}

/// Small-ρ data for Ψ± at t0 on the ray φ, with the first correction.
pub fn psi_initial(sol: &MshgSolution, th: C64, phi: f64, t0: f64, plus: bool) -> Scaled {
    let l = sol.l;
    let sigma = sol.sigma();
    let rho = t0.exp();
    let e = sol.eval(t0, phi).eta.exp();
    let zeta = C64::from_polar(1.0, phi) * th.exp();
    let norm = 1.0 / (PI * l).cos().sqrt();
    let arg = C64::new(0.0, phi) + th;
    if plus {
        let v0 = (arg * l).exp() * norm;
        let u = v0 * rho * (zeta * e / (1.0 + 2.0 * l) - sigma / (zeta * e) / (1.0 - 2.0 * l));
        Scaled::new([u, v0], 0.0)
    } else {
        let u0 = (-arg * l).exp() * norm;
        let v = u0 * rho * (-(zeta * sigma) / e / (1.0 - 2.0 * l) + e / zeta / (1.0 + 2.0 * l));
        Scaled::new([u0, v], 0.0)
    }
}

/// Where Ξ₋ starts: η has joined ¼ log|p|² and |q| = (s/ρ)^{2α} is small.
pub fn far_start(sol: &MshgSolution) -> f64 {
    let mut t = (far_radius(sol.alpha).ln() + 0.2).max(if sol.s > 0.0 { sol.s.ln() + 1.5 } else { f64::MIN });
    t = t.min(sol.disc.t_max);
    while t < sol.disc.t_max && sol.far_deviation(t) > 1e-12 {
        t = (t + 0.1).min(sol.disc.t_max);
    }
    t
}

/// Matching point at the turning scale (2 cosh Re θ̃)^{-1/(α+1)}, kept inside the grid.
pub fn matching_t(sol: &MshgSolution, th: C64) -> f64 {
    let t = -(2.0 * th.re.cosh()).ln() / (sol.alpha + 1.0);
    t.clamp(sol.disc.t_min + 1.0, far_start(sol) - 0.5)
}

/// Ξ₋(θ̃) integrated inward along the ray φ from the far region to t.
pub fn xi_on_ray(sol: &MshgSolution, th: C64, phi: f64, t: f64, rtol: f64) -> Result<Scaled> {
    let te = far_start(sol);
    let y0 = xi_minus_far(sol, th, te, phi);
    dopri(&radial(sol, th, phi), te, t, y0, rtol)
}

/// Ψ± integrated outward along the ray φ from the innermost grid point to t.
pub fn psi_on_ray(sol: &MshgSolution, th: C64, phi: f64, t: f64, plus: bool, rtol: f64) -> Result<Scaled> {
    let t0 = sol.disc.t_min;
    dopri(&radial(sol, th, phi), t0, t, psi_initial(sol, th, phi, t0, plus), rtol)
}

/// Move a solution along the arc at t from φ0 to φ1.
pub fn transport(sol: &MshgSolution, th: C64, t: f64, phi0: f64, phi1: f64, y: Scaled, rtol: f64) -> Result<Scaled> {
    dopri(&angular(sol, th, t), phi0, phi1, y, rtol)
}

/// Ξ_n(θ̃) = Ξ₋(ρ, φ + πn/α | θ̃ - iπn/α) at (t, φ): Ξ₋ at the shifted θ̃ runs
/// inward along its own decaying ray, then along the arc.
pub fn xi_n(sol: &MshgSolution, th: C64, n: i32, t: f64, phi: f64, rtol: f64) -> Result<Scaled> {
    let a = sol.alpha;
    let shift = PI * n as f64 / a;
    let thn = th - C64::new(0.0, shift);
    let ray = -thn.im / (a + 1.0);
    let y = xi_on_ray(sol, thn, ray, t, rtol)?;
    transport(sol, thn, t, ray, phi + shift, y, rtol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPair {
    pub plus: C64,
    pub minus: C64,
}

/// Q± = ±cos πl det(Ξ₋, Ψ±), formed on the ray where Ξ₋(θ̃) decays.
pub fn spectral_q(sol: &MshgSolution, th: C64) -> Result<QPair> {
    spectral_q_with(sol, th, None, DEFAULT_RTOL)
}

pub fn spectral_q_with(sol: &MshgSolution, th: C64, t_match: Option<f64>, rtol: f64) -> Result<QPair> {
    let phi = -th.im / (sol.alpha + 1.0);
    let t = t_match.unwrap_or_else(|| matching_t(sol, th));
    let xi = xi_on_ray(sol, th, phi, t, rtol)?;
    let pp = psi_on_ray(sol, th, phi, t, true, rtol)?;
    let pm = psi_on_ray(sol, th, phi, t, false, rtol)?;
    let c = (PI * sol.l).cos();
    Ok(QPair { plus: det(&xi, &pp) * c, minus: -det(&xi, &pm) * c })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearRunResult {
    pub theta_tilde: f64,
    pub rho_m: f64,
    pub psi_plus: Scaled,
    pub psi_minus: Scaled,
    pub xi_minus: Scaled,
    pub xi_plus: Scaled,
    /// det(Ψ₊, Ψ₋) at three radii up to ρ_m.
    pub det_psi: Vec<(f64, C64)>,
    pub det_xi: C64,
    pub q: QPair,
}

/// The φ = 0 run at real θ̃: Ψ± outward, Ξ₋ inward, Ξ₊ through its own ray and the arc.
pub fn integrate_linear_problem(sol: &MshgSolution, theta: f64, rho_m: Option<f64>) -> Result<LinearRunResult> {
    let th = C64::new(theta, 0.0);
    let t = match rho_m {
        Some(r) => {
            let t = r.ln();
            if t < sol.disc.t_min + 1.0 || t > sol.disc.t_max - 1.0 {
                return Err(Error::Domain(format!("ρ_m = {r} outside the grid interior")));
            }
            t
        }
        None => matching_t(sol, th),
    };
    let rtol = DEFAULT_RTOL;
    let t0 = sol.disc.t_min;
    let marks = [t0 + (t - t0) / 3.0, t0 + 2.0 * (t - t0) / 3.0, t];
    let gen = radial(sol, th, 0.0);
    let mut pp = psi_initial(sol, th, 0.0, t0, true);
    let mut pm = psi_initial(sol, th, 0.0, t0, false);
    let mut from = t0;
    let mut det_psi = Vec::new();
    for &m in &marks {
        pp = dopri(&gen, from, m, pp, rtol)?;
        pm = dopri(&gen, from, m, pm, rtol)?;
        det_psi.push((m.exp(), det(&pp, &pm)));
        from = m;
    }
    let c = (PI * sol.l).cos();
    for (_, d) in &det_psi {
        if (d * c + 1.0).norm() > 1e-5 {
            return Err(Error::Accuracy(format!("det(Ψ₊,Ψ₋) drifted to {d}, expected {}", -1.0 / c)));
        }
    }
    let xm = xi_on_ray(sol, th, 0.0, t, rtol)?;
    let xp = xi_n(sol, th, 1, t, 0.0, rtol)?;
    let q = QPair { plus: det(&xm, &pp) * c, minus: -det(&xm, &pm) * c };
    Ok(LinearRunResult {
        theta_tilde: theta,
        rho_m: t.exp(),
        psi_plus: pp,
        psi_minus: pm,
        xi_minus: xm,
        xi_plus: xp,
        det_psi,
        det_xi: det(&xm, &xp),
        q,
    })
}

/// T_j(θ) = det(Ξ_{2j+1}, Ξ₋)/(2i) at θ̃ = θ + iπ(2j+1)/(2α).
pub fn spectral_t(sol: &MshgSolution, theta: C64, j: f64) -> Result<C64> {
    let two_j = (2.0 * j).round();
    if (two_j - 2.0 * j).abs() > 1e-12 || two_j < -1.0 {
        return Err(Error::Usage(format!("j = {j} is not a half-integer ≥ -1/2")));
    }
    let n = two_j as i32 + 1;
    let th = theta + C64::new(0.0, PI * n as f64 / (2.0 * sol.alpha));
    let phi = -th.im / (sol.alpha + 1.0);
    let t = matching_t(sol, th);
    let a = xi_n(sol, th, n, t, phi, DEFAULT_RTOL)?;
    let b = xi_n(sol, th, 0, t, phi, DEFAULT_RTOL)?;
    Ok(det(&a, &b) / C64::new(0.0, 2.0))
}
