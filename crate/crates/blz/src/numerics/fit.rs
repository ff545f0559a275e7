use super::{SampledFunction, C64};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct TailFit {
    pub coefficients: Vec<C64>,
    pub residual: f64,
    pub condition: f64,
}

/// Least-squares fit f(θ) ≈ Σ a_i e^{c_i θ} over grid indices `window.0..window.1`.
pub fn fit_exponential_tail(
    f: &SampledFunction,
    exponents: &[f64],
    window: (usize, usize),
) -> Result<TailFit> {
    let (i0, i1) = window;
    if i1 > f.values.len() || i1 <= i0 || i1 - i0 < exponents.len() || exponents.is_empty() {
        return Err(Error::Usage(format!(
            "window {i0}..{i1} cannot fit {} exponents",
            exponents.len()
        )));
    }
    let rows = i1 - i0;
    let cols = exponents.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for r in 0..rows {
        let t = f.grid.node(i0 + r);
        for (c, e) in exponents.iter().enumerate() {
            a[(r, c)] = (e * t).exp();
        }
    }
    let scale: Vec<f64> = (0..cols).map(|c| a.column(c).norm()).collect();
    for c in 0..cols {
        let s = scale[c];
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > COND_LIMIT {
        return Err(Error::Fit { cond: condition, limit: COND_LIMIT });
    }
    let re = DVector::from_iterator(rows, f.values[i0..i1].iter().map(|v| v.re));
    let im = DVector::from_iterator(rows, f.values[i0..i1].iter().map(|v| v.im));
    let xr = svd.solve(&re, 0.0).map_err(|e| Error::Usage(e.to_string()))?;
    let xi = svd.solve(&im, 0.0).map_err(|e| Error::Usage(e.to_string()))?;
    let rr = &a * &xr - &re;
    let ri = &a * &xi - &im;
    let residual = (rr.norm_squared() + ri.norm_squared()).sqrt();
    let coefficients = (0..cols).map(|c| C64::new(xr[c] / scale[c], xi[c] / scale[c])).collect();
    Ok(TailFit { coefficients, residual, condition })
}
