//! Classical KdV: periodic potentials, monodromy of ψ'' = (λ² - U)ψ,
//! classical integrals of motion and the Miura-factorized matrix problem.

use crate::error::{Error, Result};
use crate::numerics::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type M2 = [[C64; 2]; 2];

/// U(w) = Σ_{|n|≤N} c_n e^{inw}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential {
    /// c_{-N}, …, c_N
    pub coefficients: Vec<C64>,
}

impl PeriodicPotential {
    pub fn from_coefficients(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() % 2 == 0 {
            return Err(Error::Usage("need an odd number of Fourier coefficients".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn constant(u0: f64) -> Self {
        Self { coefficients: vec![C64::new(u0, 0.0)] }
    }

    /// a cos w + b sin w + u0.
    pub fn trig(u0: f64, a: f64, b: f64) -> Self {
        let c1 = C64::new(a / 2.0, -b / 2.0);
        Self { coefficients: vec![c1.conj(), C64::new(u0, 0.0), c1] }
    }

    /// Band-limited interpolation of f from 2N+1 samples.
    pub fn from_fn(n_max: usize, f: impl Fn(f64) -> C64) -> Self {
        let m = 2 * n_max + 1;
        let samples: Vec<C64> = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect();
        let coefficients = (-(n_max as i64)..=n_max as i64)
            .map(|n| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (n * j as i64) as f64 / m as f64))
                    .sum::<C64>()
                    / m as f64
            })
            .collect();
        Self { coefficients }
    }

    pub fn n_max(&self) -> i64 {
        (self.coefficients.len() / 2) as i64
    }

    /// d^order U / dw^order at w.
    pub fn deriv(&self, w: f64, order: u32) -> C64 {
        let n0 = self.n_max();
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = i as i64 - n0;
                c * C64::new(0.0, n as f64).powu(order) * C64::from_polar(1.0, n as f64 * w)
            })
            .sum()
    }

    pub fn eval(&self, w: f64) -> C64 {
        self.deriv(w, 0)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        (0..64).all(|j| self.eval(2.0 * PI * j as f64 / 64.0).im.abs() < tol)
    }
}

/// φ(w) = ipw + χ(w), χ periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiuraField {
    pub p: f64,
    pub periodic: PeriodicPotential,
}

impl MiuraField {
    pub fn new(p: f64, periodic: PeriodicPotential) -> Self {
        Self { p, periodic }
    }

    /// φ'(w)
    pub fn d1(&self, w: f64) -> C64 {
        C64::new(0.0, self.p) + self.periodic.deriv(w, 1)
    }

    pub fn d2(&self, w: f64) -> C64 {
        self.periodic.deriv(w, 2)
    }
}

/// -U = φ'² + φ''.
pub fn miura(phi: &MiuraField) -> PeriodicPotential {
    let n = 2 * phi.periodic.n_max().max(1) as usize;
    PeriodicPotential::from_fn(n, |w| {
        let d = phi.d1(w);
        -(d * d) - phi.d2(w)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalIm {
    pub i1: C64,
    pub i3: C64,
    pub i5: C64,
}

/// ⟨U⟩, ⟨U²⟩, ⟨U³ - U'²/2⟩ by the trapezoid rule on 2^10 points.
pub fn classical_im(u: &PeriodicPotential) -> ClassicalIm {
    let n = 1024;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for j in 0..n {
        let w = 2.0 * PI * j as f64 / n as f64;
        let (v, d) = (u.eval(w), u.deriv(w, 1));
        acc[0] += v;
        acc[1] += v * v;
        acc[2] += v * v * v - 0.5 * d * d;
    }
    let s = 1.0 / n as f64;
    ClassicalIm { i1: acc[0] * s, i3: acc[1] * s, i5: acc[2] * s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub m: M2,
    pub trace: C64,
    /// Product of the step determinants.
    pub det: C64,
    /// |tr M(2N) - tr M(N)| / |tr M|.
    pub halving_delta: f64,
}

pub const DEFAULT_STEPS: usize = 1 << 12;
const HALVING_TOL: f64 = 1e-8;

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn det2(a: &M2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// exp of a traceless 2×2 matrix: cosh q + (sinh q / q) Ω, q² = -det Ω.
fn expm_traceless(o: &M2) -> M2 {
    let q2 = -det2(o);
    let (c, s) = if q2.norm() < 1e-6 {
        (1.0 + q2 / 2.0 + q2 * q2 / 24.0, 1.0 + q2 / 6.0 + q2 * q2 / 120.0)
    } else {
        let q = q2.sqrt();
        (q.cosh(), q.sinh() / q)
    };
    [[c + s * o[0][0], s * o[0][1]], [s * o[1][0], c + s * o[1][1]]]
}

/// Ordered product of fourth-order Magnus factors over [0, 2π].
fn ordered_product(gen: &impl Fn(f64) -> M2, n: usize) -> (M2, C64) {
    let h = 2.0 * PI / n as f64;
    let d = 3f64.sqrt() / 6.0;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    let mut det = one;
    for i in 0..n {
        let w = i as f64 * h;
        let a1 = gen(w + (0.5 - d) * h);
        let a2 = gen(w + (0.5 + d) * h);
        let c12 = mul(&a2, &a1);
        let c21 = mul(&a1, &a2);
        let k = 3f64.sqrt() * h * h / 12.0;
        let mut o = [[zero; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                o[r][c] = 0.5 * h * (a1[r][c] + a2[r][c]) + k * (c12[r][c] - c21[r][c]);
            }
        }
        let e = expm_traceless(&o);
        det *= det2(&e);
        m = mul(&e, &m);
    }
    (m, det)
}

fn richardson(gen: impl Fn(f64) -> M2, n: usize) -> Result<Monodromy> {
    let (m1, _) = ordered_product(&gen, n);
    let (m2, det) = ordered_product(&gen, 2 * n);
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = (16.0 * m2[r][c] - m1[r][c]) / 15.0;
        }
    }
    let trace = m[0][0] + m[1][1];
    let t1 = m1[0][0] + m1[1][1];
    let t2 = m2[0][0] + m2[1][1];
    let halving_delta = (t2 - t1).norm() / trace.norm().max(1e-300);
    if !halving_delta.is_finite() || halving_delta > HALVING_TOL {
        return Err(Error::Accuracy(format!("step halving changes tr M by {halving_delta:.2e}")));
    }
    Ok(Monodromy { m, trace, det, halving_delta })
}

/// Monodromy of (ψ, ψ') over one period; T = tr M.
pub fn scalar_monodromy(u: &PeriodicPotential, lambda: C64) -> Result<Monodromy> {
    scalar_monodromy_steps(u, lambda, DEFAULT_STEPS)
}

pub fn scalar_monodromy_steps(u: &PeriodicPotential, lambda: C64, n: usize) -> Result<Monodromy> {
    let l2 = lambda * lambda;
    let zero = C64::new(0.0, 0.0);
    richardson(|w| [[zero, C64::new(1.0, 0.0)], [l2 - u.eval(w), zero]], n)
}

/// Monodromy of ∂Ψ = [[φ', λ], [λ, -φ']]Ψ, the factorized form of the scalar problem.
pub fn matrix_monodromy(phi: &MiuraField, lambda: f64) -> Result<Monodromy> {
    matrix_monodromy_steps(phi, lambda, DEFAULT_STEPS)
}

pub fn matrix_monodromy_steps(phi: &MiuraField, lambda: f64, n: usize) -> Result<Monodromy> {
    let l = C64::new(lambda, 0.0);
    richardson(
        |w| {
            let d = phi.d1(w);
            [[d, l], [l, -d]]
        },
        n,
    )
}

/// c_1 = 1/2, c_n = (2n-3)!!/(2^n n!).
pub fn c_coefficient(n: usize) -> f64 {
    if n == 1 {
        return 0.5;
    }
    let dfact: f64 = (1..=(2 * n - 3)).step_by(2).map(|v| v as f64).product();
    let fact: f64 = (1..=n).map(|v| v as f64).product();
    dfact / (2f64.powi(n as i32) * fact)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsCheck {
    pub lambdas: Vec<f64>,
    /// Coefficients of λ^{1-2n}, n = 1..=fitted.len().
    pub fitted: Vec<f64>,
    /// -c_n I_{2n-1}, n = 1, 2, 3.
    pub predicted: Vec<f64>,
    pub relative_errors: Vec<f64>,
    pub condition: f64,
}

/// Fit (1/2π) log T(λ) - λ against λ^{1-2n}, n = 1..=n_terms, and compare the
/// first three coefficients with -c_n I_{2n-1}. U must be real.
pub fn check_t_asymptotics(u: &PeriodicPotential, lambdas: &[f64], n_terms: usize) -> Result<AsymptoticsCheck> {
    if n_terms < 3 || lambdas.len() < n_terms {
        return Err(Error::Usage(format!("need ≥ 3 terms and ≥ n_terms λ values, got {n_terms}, {}", lambdas.len())));
    }
    let mut rows = DMatrix::<f64>::zeros(lambdas.len(), n_terms);
    let mut rhs = DVector::<f64>::zeros(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        let t = scalar_monodromy(u, C64::new(l, 0.0))?.trace;
        if t.re <= 0.0 {
            return Err(Error::Domain(format!("T({l}) = {t} is not positive; λ too small")));
        }
        rhs[i] = t.re.ln() / (2.0 * PI) - l;
        for n in 1..=n_terms {
            rows[(i, n - 1)] = l.powi(1 - 2 * n as i32);
        }
    }
    let svd = rows.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if condition > 1e12 {
        return Err(Error::Fit { cond: condition, limit: 1e12 });
    }
    let x = svd.solve(&rhs, 1e-14).map_err(|e| Error::Accuracy(e.to_string()))?;
    let im = classical_im(u);
    let predicted: Vec<f64> = [im.i1, im.i3, im.i5].iter().enumerate().map(|(i, v)| -c_coefficient(i + 1) * v.re).collect();
    let fitted: Vec<f64> = x.iter().cloned().collect();
    let relative_errors = predicted.iter().zip(&fitted).map(|(p, f)| ((f - p) / p).abs()).collect();
    Ok(AsymptoticsCheck { lambdas: lambdas.to_vec(), fitted, predicted, relative_errors, condition })
}
