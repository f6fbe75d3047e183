//! Banded Cholesky factorisation `A = L L^H` for Hermitian positive definite
//! matrices stored by lower band.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i` at offsets `0 ..= bw`.
    l: Vec<Complex64>,
}

impl BandCholesky {
    /// Factors the matrix whose lower band is produced by `entry(i, j)` for
    /// `i - bw <= j <= i`. Returns `None` when a pivot is not positive.
    pub fn factor<F>(n: usize, bw: usize, entry: F) -> Option<Self>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let w = bw + 1;
        let mut l = vec![Complex64::new(0.0, 0.0); n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                l[i * w + (j + bw - i)] = entry(i, j);
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let row_i = &l[i * w..(i + 1) * w];
                let row_j = &l[j * w..(j + 1) * w];
                let mut s = row_i[j + bw - i];
                for k in k0..j {
                    s -= row_i[k + bw - i] * row_j[k + bw - j].conj();
                }
                if i == j {
                    if !(s.re > 0.0) || !s.re.is_finite() {
                        return None;
                    }
                    l[i * w + bw] = Complex64::new(s.re.sqrt(), 0.0);
                } else {
                    let d = l[j * w + bw].re;
                    l[i * w + (j + bw - i)] = s / d;
                }
            }
        }
        Some(Self { n, bw, l })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let row = &self.l[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in j0..i {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s / row[bw].re;
        }
        for i in (0..n).rev() {
            let s = b[i] / self.l[i * w + bw].re;
            b[i] = s;
            let j0 = i.saturating_sub(bw);
            let row = &self.l[i * w..(i + 1) * w];
            for j in j0..i {
                b[j] -= row[j + bw - i].conj() * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize, bw: usize) -> DMatrix<Complex64> {
        let mut a = DMatrix::from_element(n, n, c(0.0, 0.0));
        for i in 0..n {
            a[(i, i)] = c(2.0 * bw as f64 + 3.0 + (i as f64).sin(), 0.0);
            for k in 1..=bw.min(i) {
                let v = c((0.3 * (i * 7 + k) as f64).cos(), (0.7 * (i + 3 * k) as f64).sin());
                a[(i, i - k)] = v;
                a[(i - k, i)] = v.conj();
            }
        }
        a
    }

    #[test]
    fn solve_matches_dense_lu() {
        let (n, bw) = (40, 5);
        let a = test_matrix(n, bw);
        let f = BandCholesky::factor(n, bw, |i, j| a[(i, j)]).expect("positive definite");
        let b = DVector::from_fn(n, |i, _| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05));
        let want = a.clone().lu().solve(&b).unwrap();
        let mut got: Vec<Complex64> = b.iter().copied().collect();
        f.solve(&mut got);
        for i in 0..n {
            assert!((got[i] - want[i]).norm() < 1e-12, "component {i}");
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = test_matrix(10, 2);
        let shifted = |i: usize, j: usize| if i == j { a[(i, j)] - c(100.0, 0.0) } else { a[(i, j)] };
        assert!(BandCholesky::factor(10, 2, shifted).is_none());
    }
}
