use super::C64;

fn stencil(n: usize, x0: f64, h: f64, x: f64, order: usize) -> (usize, f64) {
    let pos = (x - x0) / h;
    let half = order / 2;
    let start = (pos.floor() as isize - half as isize + 1).clamp(0, (n - order) as isize) as usize;
    (start, pos - start as f64)
}

fn weights(order: usize, u: f64) -> Vec<f64> {
    (0..order)
        .map(|j| {
            let mut w = 1.0;
            for m in 0..order {
                if m != j {
                    w *= (u - m as f64) / (j as f64 - m as f64);
                }
            }
            w
        })
        .collect()
}

/// Local Lagrange interpolation of uniformly spaced samples.
pub fn interp_uniform(values: &[f64], x0: f64, h: f64, x: f64, order: usize) -> f64 {
    let order = order.min(values.len());
    let (start, u) = stencil(values.len(), x0, h, x, order);
    weights(order, u).iter().enumerate().map(|(j, w)| w * values[start + j]).sum()
}

pub fn interp_uniform_complex(values: &[C64], x0: f64, h: f64, x: f64, order: usize) -> C64 {
    let order = order.min(values.len());
    let (start, u) = stencil(values.len(), x0, h, x, order);
    weights(order, u).iter().enumerate().map(|(j, w)| values[start + j] * *w).sum()
}
