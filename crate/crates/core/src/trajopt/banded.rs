//! Symmetric banded matrices and their Cholesky factorization.

use crate::Real;

/// Symmetric matrix stored as its lower band: `a[i][k] = A(i, i - k)`.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kd: usize,
    a: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        BandMatrix {
            n,
            kd,
            a: vec![T::zero(); n * (kd + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    /// Adds `v` to `A(i, j)` (and its mirror). Entries outside the band panic.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.kd, "entry ({i},{j}) outside band {}", self.kd);
        self.a[i * (self.kd + 1) + k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.kd {
            T::zero()
        } else {
            self.a[i * (self.kd + 1) + k]
        }
    }

    pub fn add_diagonal(&mut self, v: T) {
        for i in 0..self.n {
            self.a[i * (self.kd + 1)] += v;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            for k in 0..=self.kd.min(i) {
                let j = i - k;
                let v = self.a[i * (self.kd + 1) + k];
                y[i] += v * x[j];
                if k > 0 {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// In-place Cholesky `A = L Lᵀ`. Returns `None` if not positive definite.
    pub fn cholesky(mut self) -> Option<BandCholesky<T>> {
        let w = self.kd + 1;
        for i in 0..self.n {
            let jmin = i.saturating_sub(self.kd);
            for j in jmin..=i {
                let mut s = self.a[i * w + (i - j)];
                let kmin = jmin.max(j.saturating_sub(self.kd));
                for k in kmin..j {
                    s -= self.a[i * w + (i - k)] * self.a[j * w + (j - k)];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    self.a[i * w] = s.sqrt();
                } else {
                    self.a[i * w + (i - j)] = s / self.a[j * w];
                }
            }
        }
        Some(BandCholesky { l: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky<T> {
    l: BandMatrix<T>,
}

impl<T: Real> BandCholesky<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.n;
        let kd = self.l.kd;
        let w = kd + 1;
        let a = &self.l.a;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in i.saturating_sub(kd)..i {
                s -= a[i * w + (i - j)] * y[j];
            }
            y[i] = s / a[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + w).min(n) {
                s -= a[j * w + (j - i)] * y[j];
            }
            y[i] = s / a[i * w];
        }
        y
    }
}
