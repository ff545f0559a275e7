use crate::error::{Error, Result};

/// Real band matrix with LU factorization by partial pivoting, stored column-major
/// with `kl` extra rows on top for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n], ipiv: vec![0; n], factored: false }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) + self.ldab * j
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let ld = self.ldab;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.ab[kv + ld * j].abs();
            for ii in 1..=km {
                let v = self.ab[kv + ii + ld * j].abs();
                if v > best {
                    best = v;
                    jp = ii;
                }
            }
            self.ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::Domain(format!("singular band matrix at column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = kv + j - c + ld * c;
                    let b = kv + j + jp - c + ld * c;
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[kv + ld * j];
            for ii in 1..=km {
                self.ab[kv + ii + ld * j] /= piv;
            }
            for c in j + 1..=ju {
                let f = self.ab[kv + j - c + ld * c];
                if f != 0.0 {
                    for ii in 1..=km {
                        let l = self.ab[kv + ii + ld * j];
                        self.ab[kv + j + ii - c + ld * c] -= l * f;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let ld = self.ldab;
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            for ii in 1..=km {
                b[j + ii] -= self.ab[kv + ii + ld * j] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[kv + ld * j];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= self.ab[kv + i - j + ld * j] * bj;
            }
        }
    }
}
