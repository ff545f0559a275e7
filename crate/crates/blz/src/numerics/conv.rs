use super::{RapidityGrid, SampledFunction, C64};
use crate::error::{Error, Result};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Linear convolution against a fixed kernel lattice, reused across iterations.
///
/// `kernel[q]` is the kernel at offset `(q - q0) h`; `apply` returns
/// `sum_j kernel[i - j + q0] f[j]` for every output node i (no spacing factor).
pub struct FftConvolver {
    n_f: usize,
    q0: usize,
    size: usize,
    kernel_hat: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftConvolver {
    pub fn new(kernel: &[C64], q0: usize, n_f: usize) -> Self {
        let size = (kernel.len() + n_f - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut kernel_hat = vec![C64::new(0.0, 0.0); size];
        kernel_hat[..kernel.len()].copy_from_slice(kernel);
        fwd.process(&mut kernel_hat);
        let scale = 1.0 / size as f64;
        for v in kernel_hat.iter_mut() {
            *v *= scale;
        }
        Self { n_f, q0, size, kernel_hat, fwd, inv }
    }

    /// Kernel sampled at offsets `-(n_f-1)h ..= (n_f-1)h` from a closure.
    pub fn from_fn(n_f: usize, h: f64, kernel: impl Fn(f64) -> C64) -> Self {
        let q0 = n_f - 1;
        let k: Vec<C64> = (0..2 * n_f - 1).map(|q| kernel((q as f64 - q0 as f64) * h)).collect();
        Self::new(&k, q0, n_f)
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.n_f);
        let mut buf = vec![C64::new(0.0, 0.0); self.size];
        buf[..self.n_f].copy_from_slice(f);
        self.fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inv.process(&mut buf);
        (0..self.n_f)
            .map(|i| {
                let n = i + self.q0;
                if n < self.size {
                    buf[n]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Convolution {
    pub result: SampledFunction,
    /// Set when the kernel has not decayed below 1e-12 (relative) at its grid edges.
    pub edge_warning: bool,
}

/// (kernel ⋆ f)(θ) = ∫ kernel(θ-θ') f(θ') dθ' on f's grid, trapezoid weights.
///
/// The kernel lattice lives on its own grid with the same spacing, and its
/// nodes must sit on integer multiples of that spacing.
pub fn convolve(kernel: &SampledFunction, f: &SampledFunction) -> Result<Convolution> {
    let h = f.grid.spacing();
    let hk = kernel.grid.spacing();
    if ((h - hk) / h).abs() > 1e-12 {
        return Err(Error::Usage(format!("spacing mismatch: kernel {hk}, function {h}")));
    }
    let q0f = -kernel.grid.theta_min / h;
    if (q0f - q0f.round()).abs() > 1e-6 || q0f.round() < 0.0 {
        return Err(Error::Usage("kernel nodes are not aligned with multiples of the spacing".into()));
    }
    let q0 = q0f.round() as usize;
    let kmax = kernel.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let nk = kernel.values.len();
    let edge = kernel.values[0].norm().max(kernel.values[nk - 1].norm());
    let edge_warning = kmax > 0.0 && edge > 1e-12 * kmax;

    let mut w = f.values.clone();
    let n = w.len();
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    let raw = FftConvolver::new(&kernel.values, q0, n).apply(&w);
    let values: Vec<C64> = raw.into_iter().map(|v| v * h).collect();
    let grid: RapidityGrid = f.grid;
    let result = SampledFunction::new(grid, values, f.strip_offset + kernel.strip_offset)?;
    Ok(Convolution { result, edge_warning })
}
