//! The modified sinh-Gordon equation on the cone of angle π/α, in t = log ρ.
//!
//! η_tt + η_φφ = 4 e^{2t} (e^{2η} - |p|² e^{-2η}),  |p|² = ρ^{4α} - 2ρ^{2α}σ cos 2αφ + σ²,  σ = s^{2α}.
//!
//! η is even about φ = 0 and about φ = π/2α, so it is expanded in cos(2αmφ), m < M,
//! and collocated at φ_j = (j + 1/2) π/(2αM). Fourth-order differences in t.

use crate::error::{Error, Result};
use crate::numerics::{BandMatrix, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MshgDiscretization {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub m_modes: usize,
}

/// Radius beyond which η sits on ¼ log|p|² to double precision: 4ρ^{α+1}/(α+1) = 40.
pub fn far_radius(alpha: f64) -> f64 {
    (10.0 * (alpha + 1.0)).powf(1.0 / (alpha + 1.0))
}

impl MshgDiscretization {
    pub fn default_for(alpha: f64, s: f64, l: f64) -> Self {
        let ts = if s > 0.0 { s.ln() } else { 0.0 };
        let t_min = ts - (26.0 / (2.0 - 4.0 * l.abs())).max(3.0);
        let t_max = (far_radius(alpha).ln() + 0.3).max(ts + 3.0);
        let h = 0.02;
        let n_t = ((t_max - t_min) / h).ceil() as usize + 1;
        Self { t_min, t_max, n_t, m_modes: 16 }
    }

    pub fn h(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MshgSolution {
    pub alpha: f64,
    pub s: f64,
    pub l: f64,
    pub disc: MshgDiscretization,
    /// Cosine coefficients a_m(t_i), row-major in i.
    pub coeffs: Vec<f64>,
    /// d a_m / dt on the same grid.
    pub coeffs_t: Vec<f64>,
    pub eta0: f64,
    pub gamma: Vec<f64>,
    /// max over interior nodes of |residual| relative to the sum of the magnitudes of its terms.
    pub pde_residual: f64,
    pub newton_history: Vec<f64>,
    /// max_t |a_{M-1}(t)|.
    pub mode_tail: f64,
}

fn p_abs2(alpha: f64, sigma: f64, t: f64, phi: f64) -> f64 {
    let r2a = (2.0 * alpha * t).exp();
    r2a * r2a - 2.0 * r2a * sigma * (2.0 * alpha * phi).cos() + sigma * sigma
}

struct Basis {
    /// C[j][m] = cos(m x_j)
    c: Vec<Vec<f64>>,
    cinv: Vec<Vec<f64>>,
    phi: Vec<f64>,
}

impl Basis {
    fn new(alpha: f64, m: usize) -> Self {
        let x: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) * PI / m as f64).collect();
        let c = x.iter().map(|&xj| (0..m).map(|k| (k as f64 * xj).cos()).collect()).collect();
        let cinv = (0..m)
            .map(|k| x.iter().map(|&xj| (if k == 0 { 1.0 } else { 2.0 }) / m as f64 * (k as f64 * xj).cos()).collect())
            .collect();
        let phi = x.iter().map(|xj| xj / (2.0 * alpha)).collect();
        Self { c, cinv, phi }
    }

    /// C diag(d) C⁻¹
    fn nodal(&self, d: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        let m = self.phi.len();
        (0..m)
            .map(|a| (0..m).map(|b| (0..m).map(|k| self.c[a][k] * d(k) * self.cinv[k][b]).sum()).collect())
            .collect()
    }

    fn to_modes(&self, u: &[f64]) -> Vec<f64> {
        self.cinv.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }
}

fn stencil_tt(i: usize, n: usize) -> (usize, &'static [f64]) {
    const FIRST: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    const LAST: [f64; 6] = [1.0, -6.0, 14.0, -4.0, -15.0, 10.0];
    const MID: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    if i == 1 {
        (0, &FIRST)
    } else if i == n - 2 {
        (n - 6, &LAST)
    } else {
        (i - 2, &MID)
    }
}

const NEUMANN: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];

fn first_derivative(v: &[f64], i: usize, h: f64) -> f64 {
    let n = v.len();
    if i == 0 {
        (0..5).map(|k| NEUMANN[k] * v[k]).sum::<f64>() / (12.0 * h)
    } else if i == 1 {
        (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    } else if i + 2 >= n {
        let w: Vec<f64> = v.iter().rev().copied().collect();
        -first_derivative(&w, n - 1 - i, h)
    } else {
        (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
    }
}

pub fn solve_mshg(alpha: f64, s: f64, l: f64, disc: &MshgDiscretization, tol: f64) -> Result<MshgSolution> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("α = {alpha}: the far-field normalization needs α > 1")));
    }
    if l.abs() > 0.4 + 1e-12 {
        return Err(Error::Domain(format!("|l| = {} above 0.4", l.abs())));
    }
    if s < 0.0 {
        return Err(Error::Domain(format!("s = {s} negative")));
    }
    let ts = if s > 0.0 { s.ln() } else { 0.0 };
    if s > 0.0 && (disc.t_min > ts - 3.0 || disc.t_max < ts + 3.0) {
        return Err(Error::Domain("t range must cover log s ± 3".into()));
    }
    if disc.n_t < 8 || disc.m_modes < 1 {
        return Err(Error::Usage("need n_t ≥ 8 and at least one mode".into()));
    }
    let (n, m) = (disc.n_t, disc.m_modes);
    let h = disc.h();
    let sigma = s.powf(2.0 * alpha);
    let basis = Basis::new(alpha, m);
    let dphi2 = basis.nodal(|k| -(2.0 * alpha * k as f64).powi(2));
    let dneu = basis.nodal(|k| 2.0 * alpha * k as f64);
    let ts_grid: Vec<f64> = (0..n).map(|i| disc.t_min + i as f64 * h).collect();
    let pp: Vec<f64> =
        (0..n * m).map(|q| p_abs2(alpha, sigma, ts_grid[q / m], basis.phi[q % m])).collect();

    let mut u: Vec<f64> = (0..n * m)
        .map(|q| {
            let t = ts_grid[q / m];
            let sp = (t - ts).exp().ln_1p();
            2.0 * l * t + (alpha - 2.0 * l) * (ts + sp)
        })
        .collect();
    for j in 0..m {
        u[(n - 1) * m + j] = 0.25 * pp[(n - 1) * m + j].ln();
    }

    let residual = |u: &[f64]| -> (Vec<f64>, f64) {
        let mut f = vec![0.0; n * m];
        let mut scaled = 0.0f64;
        for j in 0..m {
            let d: f64 = (0..5).map(|k| NEUMANN[k] * u[k * m + j]).sum::<f64>() / (12.0 * h);
            let dn: f64 = (0..m).map(|b| dneu[j][b] * u[b]).sum();
            f[j] = d - 2.0 * l - dn;
            f[(n - 1) * m + j] = u[(n - 1) * m + j] - 0.25 * pp[(n - 1) * m + j].ln();
        }
        for i in 1..n - 1 {
            let (st, w) = stencil_tt(i, n);
            let e2t = 4.0 * (2.0 * ts_grid[i]).exp();
            for j in 0..m {
                let q = i * m + j;
                let mut size = 1.0;
                let mut dtt = 0.0;
                for (k, c) in w.iter().enumerate() {
                    let v = c * u[(st + k) * m + j] / (12.0 * h * h);
                    dtt += v;
                    size += v.abs();
                }
                let mut dpp = 0.0;
                for b in 0..m {
                    let v = dphi2[j][b] * u[i * m + b];
                    dpp += v;
                    size += v.abs();
                }
                let (ep, em) = ((2.0 * u[q]).exp(), pp[q] * (-2.0 * u[q]).exp());
                f[q] = dtt + dpp - e2t * (ep - em);
                scaled = scaled.max(f[q].abs() / (size + e2t * (ep + em)));
            }
        }
        (f, scaled)
    };

    let bw = 5 * m - 1;
    let mut history = Vec::new();
    let (mut f, mut scaled) = residual(&u);
    let norm = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut fnorm = norm(&f);
    history.push(scaled);
    let mut converged = false;
    for _ in 0..80 {
        let mut jac = BandMatrix::zeros(n * m, bw, bw);
        for j in 0..m {
            for k in 0..5 {
                jac.add(j, k * m + j, NEUMANN[k] / (12.0 * h));
            }
            for b in 0..m {
                jac.add(j, b, -dneu[j][b]);
            }
            jac.add((n - 1) * m + j, (n - 1) * m + j, 1.0);
        }
        for i in 1..n - 1 {
            let (st, w) = stencil_tt(i, n);
            let e2t = 4.0 * (2.0 * ts_grid[i]).exp();
            for j in 0..m {
                let q = i * m + j;
                for (k, c) in w.iter().enumerate() {
                    jac.add(q, (st + k) * m + j, c / (12.0 * h * h));
                }
                for b in 0..m {
                    jac.add(q, i * m + b, dphi2[j][b]);
                }
                jac.add(q, q, -e2t * (2.0 * (2.0 * u[q]).exp() + 2.0 * pp[q] * (-2.0 * u[q]).exp()));
            }
        }
        jac.factor()?;
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        jac.solve(&mut delta);
        let step = delta.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lam * d).collect();
            let (ft, st) = residual(&trial);
            let nt = norm(&ft);
            if nt.is_finite() && (nt <= (1.0 - 1e-4 * lam) * fnorm || lam * step < 1e-3 * tol.max(1e-14) || lam < 1e-3) {
                u = trial;
                f = ft;
                fnorm = nt;
                scaled = st;
                break;
            }
            lam *= 0.5;
        }
        history.push(scaled);
        if lam * step < tol && scaled < tol.max(1e-12) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence { iterations: history.len() - 1, defect: scaled });
    }

    let mut coeffs = vec![0.0; n * m];
    for i in 0..n {
        let a = basis.to_modes(&u[i * m..(i + 1) * m]);
        coeffs[i * m..(i + 1) * m].copy_from_slice(&a);
    }
    let mut coeffs_t = vec![0.0; n * m];
    for k in 0..m {
        let col: Vec<f64> = (0..n).map(|i| coeffs[i * m + k]).collect();
        for i in 0..n {
            coeffs_t[i * m + k] = first_derivative(&col, i, h);
        }
    }
    let mode_tail = (0..n).map(|i| coeffs[i * m + m - 1].abs()).fold(0.0, f64::max);

    // η₀ from the innermost tenth, removing the leading small-ρ corrections
    let inner = (n / 10).max(2);
    let mut eta0 = coeffs[0] - 2.0 * l * ts_grid[0];
    for _ in 0..3 {
        let mut acc = 0.0;
        for i in 0..inner {
            let t = ts_grid[i];
            let corr = -sigma * sigma * (-2.0 * eta0).exp() * ((2.0 - 4.0 * l) * t).exp() / (1.0 - 2.0 * l).powi(2)
                + (2.0 * eta0).exp() * ((2.0 + 4.0 * l) * t).exp() / (1.0 + 2.0 * l).powi(2);
            acc += coeffs[i * m] - 2.0 * l * t - corr;
        }
        eta0 = acc / inner as f64;
    }
    // γ_k from a_k ≈ 2γ_k ρ^{2αk} where mode k is still above rounding
    let gamma = (1..m.min(4))
        .map(|k| {
            let i = (0..n).find(|&i| coeffs[i * m + k].abs() > 1e-8).unwrap_or(n - 1);
            coeffs[i * m + k] / (2.0 * (2.0 * alpha * k as f64 * ts_grid[i]).exp())
        })
        .collect();

    let sol = MshgSolution {
        alpha,
        s,
        l,
        disc: *disc,
        coeffs,
        coeffs_t,
        eta0,
        gamma,
        pde_residual: scaled,
        newton_history: history,
        mode_tail,
    };
    if mode_tail > 1e-7 {
        return Err(Error::Resolution(format!("angular tail {mode_tail:.2e} with M = {m}")));
    }
    Ok(sol)
}

/// η and its t-, φ-derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct EtaPoint {
    pub eta: f64,
    pub eta_t: f64,
    pub eta_phi: f64,
}

impl MshgSolution {
    pub fn sigma(&self) -> f64 {
        self.s.powf(2.0 * self.alpha)
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let h = self.disc.h();
        (0..self.disc.n_t).map(|i| self.disc.t_min + i as f64 * h).collect()
    }

    /// Complex Fourier coefficients in e^{2αimφ}, m = -(M-1)..=(M-1), at grid index i.
    pub fn modes(&self, i: usize) -> Vec<C64> {
        let m = self.disc.m_modes;
        let a = &self.coeffs[i * m..(i + 1) * m];
        let mut out = vec![C64::new(0.0, 0.0); 2 * m - 1];
        out[m - 1] = C64::new(a[0], 0.0);
        for k in 1..m {
            out[m - 1 + k] = C64::new(a[k] / 2.0, 0.0);
            out[m - 1 - k] = C64::new(a[k] / 2.0, 0.0);
        }
        out
    }

    /// Six-point Lagrange interpolation in t of a_m and a_m'.
    fn coeffs_at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.disc.n_t, self.disc.m_modes);
        let h = self.disc.h();
        let x = (t - self.disc.t_min) / h;
        let start = ((x.floor() as isize) - 2).clamp(0, n as isize - 6) as usize;
        let mut w = [0.0; 6];
        for (k, wk) in w.iter_mut().enumerate() {
            let mut p = 1.0;
            for q in 0..6 {
                if q != k {
                    p *= (x - (start + q) as f64) / (k as f64 - q as f64);
                }
            }
            *wk = p;
        }
        let mut a = vec![0.0; m];
        let mut at = vec![0.0; m];
        for (k, wk) in w.iter().enumerate() {
            let row = (start + k) * m;
            for q in 0..m {
                a[q] += wk * self.coeffs[row + q];
                at[q] += wk * self.coeffs_t[row + q];
            }
        }
        (a, at)
    }

    pub fn eval(&self, t: f64, phi: f64) -> EtaPoint {
        let (a, at) = self.coeffs_at(t);
        let mut out = EtaPoint { eta: 0.0, eta_t: 0.0, eta_phi: 0.0 };
        for k in 0..a.len() {
            let w = 2.0 * self.alpha * k as f64;
            let (sn, cs) = (w * phi).sin_cos();
            out.eta += a[k] * cs;
            out.eta_t += at[k] * cs;
            out.eta_phi -= w * a[k] * sn;
        }
        out
    }

    /// ¼ log|p|², the exact solution away from the zeros of p.
    pub fn far_field(&self, t: f64, phi: f64) -> f64 {
        0.25 * p_abs2(self.alpha, self.sigma(), t, phi).ln()
    }

    /// Largest |η - ¼ log|p|²| over the collocation angles at t.
    pub fn far_deviation(&self, t: f64) -> f64 {
        let m = self.disc.m_modes;
        (0..m)
            .map(|j| {
                let phi = (j as f64 + 0.5) * PI / (2.0 * self.alpha * m as f64);
                (self.eval(t, phi).eta - self.far_field(t, phi)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// |∂_t η(t_min) - 2l| and |η(t_max) - α t_max| over the collocation angles.
    pub fn boundary_mismatch(&self) -> (f64, f64) {
        let m = self.disc.m_modes;
        let mut inner = 0.0f64;
        let mut outer = 0.0f64;
        for j in 0..m {
            let phi = (j as f64 + 0.5) * PI / (2.0 * self.alpha * m as f64);
            inner = inner.max((self.eval(self.disc.t_min, phi).eta_t - 2.0 * self.l).abs());
            outer = outer.max((self.eval(self.disc.t_max, phi).eta - self.alpha * self.disc.t_max).abs());
        }
        (inner, outer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent radial solver: second-order differences, Thomas algorithm, Newton.
    fn radial_oracle(alpha: f64, l: f64, t_min: f64, t_max: f64, n: usize) -> f64 {
        let h = (t_max - t_min) / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| t_min + i as f64 * h).collect();
        let mut u: Vec<f64> = t.iter().map(|&x| 2.0 * l * x + (alpha - 2.0 * l) * x.exp().ln_1p()).collect();
        u[n - 1] = alpha * t[n - 1];
        for _ in 0..100 {
            let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            // ghost-point Neumann: (u_1 - u_{-1})/2h = 2l
            for i in 0..n - 1 {
                let e = 4.0 * (2.0 * t[i]).exp();
                let g = (4.0 * alpha * t[i]).exp();
                let (ep, em) = ((2.0 * u[i]).exp(), g * (-2.0 * u[i]).exp());
                let (um, up) = if i == 0 { (u[1] - 4.0 * l * h, u[1]) } else { (u[i - 1], u[i + 1]) };
                d[i] = -((um - 2.0 * u[i] + up) / (h * h) - e * (ep - em));
                b[i] = -2.0 / (h * h) - e * (2.0 * ep + 2.0 * em);
                if i == 0 {
                    c[i] = 2.0 / (h * h);
                } else {
                    a[i] = 1.0 / (h * h);
                    c[i] = 1.0 / (h * h);
                }
            }
            b[n - 1] = 1.0;
            d[n - 1] = 0.0;
            for i in 1..n {
                let w = a[i] / b[i - 1];
                b[i] -= w * c[i - 1];
                d[i] -= w * d[i - 1];
            }
            let mut x = vec![0.0; n];
            x[n - 1] = d[n - 1] / b[n - 1];
            for i in (0..n - 1).rev() {
                x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
            }
            let step = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                u[i] += x[i];
            }
            if step < 1e-13 {
                break;
            }
        }
        u[0] - 2.0 * l * t[0]
    }

    #[test]
    fn radial_case_matches_independent_solver() {
        let (alpha, l) = (2.0, 0.0);
        let mut disc = MshgDiscretization::default_for(alpha, 0.0, l);
        disc.m_modes = 4;
        let sol = solve_mshg(alpha, 0.0, l, &disc, 1e-11).unwrap();
        // the angular modes vanish
        let n = disc.n_t;
        for i in 0..n {
            for k in 1..4 {
                assert!(sol.coeffs[i * 4 + k].abs() < 1e-10);
            }
        }
        assert!(sol.pde_residual < 1e-11);
        // monotone zero mode
        assert!((1..n).all(|i| sol.coeffs[i * 4] >= sol.coeffs[(i - 1) * 4] - 1e-14));
        // second-order oracle with Richardson
        let (a, b) = (disc.t_min, disc.t_max);
        let e1 = radial_oracle(alpha, l, a, b, 4001);
        let e2 = radial_oracle(alpha, l, a, b, 8001);
        let oracle = (4.0 * e2 - e1) / 3.0;
        assert!((sol.eta0 - oracle).abs() < 1e-7, "{} {oracle}", sol.eta0);
    }

    #[test]
    fn massive_case_boundaries_and_refinement() {
        let (alpha, s, l) = (2.0, 0.8, 0.1);
        let disc = MshgDiscretization::default_for(alpha, s, l);
        let sol = solve_mshg(alpha, s, l, &disc, 1e-11).unwrap();
        assert!(sol.pde_residual < 1e-11, "{}", sol.pde_residual);
        let (inner, outer) = sol.boundary_mismatch();
        assert!(inner < 1e-8, "{inner}");
        assert!(outer < 1e-3, "{outer}");
        assert!(sol.far_deviation(far_radius(alpha).ln()) < 1e-11);
        // reality and φ → -φ symmetry are built in: the complex modes pair up
        let md = sol.modes(disc.n_t / 2);
        let mm = disc.m_modes;
        for k in 1..mm {
            assert!((md[mm - 1 + k] - md[mm - 1 - k].conj()).norm() < 1e-10);
        }
        let p = sol.eval(s.ln(), 0.3);
        let q = sol.eval(s.ln(), -0.3);
        assert!((p.eta - q.eta).abs() < 1e-12 && (p.eta_phi + q.eta_phi).abs() < 1e-12);
        let mut d2 = disc;
        d2.m_modes = 2 * disc.m_modes;
        let sol2 = solve_mshg(alpha, s, l, &d2, 1e-11).unwrap();
        assert!((sol.eta0 - sol2.eta0).abs() < 1e-7, "{} {}", sol.eta0, sol2.eta0);
    }

    #[test]
    fn t_refinement_is_fourth_order() {
        let (alpha, s, l) = (2.0, 0.7, 0.2);
        let d = MshgDiscretization::default_for(alpha, s, l);
        let mut coarse = d;
        coarse.n_t = (d.n_t - 1) / 2 + 1;
        let a = solve_mshg(alpha, s, l, &coarse, 1e-11).unwrap();
        let b = solve_mshg(alpha, s, l, &d, 1e-11).unwrap();
        assert!((a.eta0 - b.eta0).abs() < 1e-6, "{} {}", a.eta0, b.eta0);
    }

    #[test]
    fn periodic_in_phi() {
        let sol = solve_mshg(2.5, 0.6, -0.2, &MshgDiscretization::default_for(2.5, 0.6, -0.2), 1e-11).unwrap();
        for t in [-2.0, -0.5, 0.4] {
            let a = sol.eval(t, 0.13);
            let b = sol.eval(t, 0.13 + PI / 2.5);
            assert!((a.eta - b.eta).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = MshgDiscretization::default_for(2.0, 0.5, 0.0);
        assert!(matches!(solve_mshg(2.0, 0.5, 0.45, &d, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(solve_mshg(0.8, 0.5, 0.0, &d, 1e-10), Err(Error::Domain(_))));
    }
}
