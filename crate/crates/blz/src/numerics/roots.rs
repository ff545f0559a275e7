use crate::error::{Error, Result};

/// Root of `f` in a sign-changing bracket: bisection down to a narrow bracket,
/// then safeguarded Newton steps with a difference-quotient slope.
pub fn find_root_increasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Bracket { flo: fa, fhi: fb });
    }
    let coarse = (1e-4 * (b - a)).max(tol);
    while b - a > coarse {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if b - a < tol {
            return Ok(0.5 * (a + b));
        }
        let d = (1e-3 * (b - a)).max(1e-12 * x.abs().max(1.0));
        let slope = (f(x + d) - f(x - d)) / (2.0 * d);
        let step = fx / slope;
        let next = x - step;
        if slope.is_finite() && slope != 0.0 && next > a && next < b {
            if step.abs() < 0.25 * tol {
                return Ok(next);
            }
            x = next;
        } else {
            x = 0.5 * (a + b);
        }
    }
    Ok(x)
}
