//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from bisection on Sturm counts. Eigenvectors come from a
//! twisted factorisation, which builds each component as a product of
//! ratios; tiny tail entries therefore keep their relative accuracy.
//! Eigenvalues in a cluster fall back to inverse iteration with
//! orthogonalisation against the previous cluster members.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let qq = if q == 0.0 { tiny } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `j`-th smallest eigenvalue (0-based) by bisection to full precision.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], j: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn twisted_vector(diag: &[f64], off: &[f64], lambda: f64, pivot_floor: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    let guard = |x: f64| if x.abs() < pivot_floor { pivot_floor.copysign(x) } else { x };
    let mut dplus = vec![0.0; n];
    let mut lplus = vec![0.0; n - 1];
    dplus[0] = guard(diag[0] - lambda);
    for i in 0..n - 1 {
        lplus[i] = off[i] / dplus[i];
        dplus[i + 1] = guard(diag[i + 1] - lambda - lplus[i] * off[i]);
    }
    let mut dminus = vec![0.0; n];
    let mut uminus = vec![0.0; n - 1];
    dminus[n - 1] = guard(diag[n - 1] - lambda);
    for i in (0..n - 1).rev() {
        uminus[i] = off[i] / dminus[i + 1];
        dminus[i] = guard(diag[i] - lambda - uminus[i] * off[i]);
    }
    let mut twist = 0;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let gamma = (dplus[k] + dminus[k] - (diag[k] - lambda)).abs();
        if gamma < best {
            best = gamma;
            twist = k;
        }
    }
    let mut z = vec![0.0; n];
    z[twist] = 1.0;
    for i in (0..twist).rev() {
        z[i] = -lplus[i] * z[i + 1];
    }
    for i in twist..n - 1 {
        z[i + 1] = -uminus[i] * z[i];
    }
    normalize(&mut z);
    z
}

fn normalize(v: &mut [f64]) {
    // Scale first so the sum of squares cannot overflow.
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m == 0.0 {
        return;
    }
    let s = v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt() * m;
    v.iter_mut().for_each(|x| *x /= s);
}

/// Solves `(T - sigma) x = b` with partial pivoting (Gaussian elimination on
/// the tridiagonal band).
fn solve_shifted(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // Rows hold (sub, main, sup, sup2) after pivoting.
    let mut dl: Vec<f64> = off.to_vec();
    let mut d: Vec<f64> = diag.iter().map(|x| x - sigma).collect();
    let mut du: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    let tiny = f64::EPSILON * d.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] -= fact * x[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

fn cluster_vector(diag: &[f64], off: &[f64], lambda: f64, previous: &[&Vec<f64>], scale: f64) -> Vec<f64> {
    let n = diag.len();
    let sigma = lambda + 4.0 * f64::EPSILON * scale;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let orth = |v: &mut Vec<f64>| {
        for p in previous {
            let dot: f64 = v.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p.iter()).for_each(|(a, b)| *a -= dot * b);
        }
        normalize(v);
    };
    orth(&mut v);
    for _ in 0..4 {
        v = solve_shifted(diag, off, sigma, &v);
        orth(&mut v);
    }
    v
}

/// The `k` algebraically smallest eigenpairs, ascending.
pub fn symm_tridiag_lowest(diag: &[f64], off: &[f64], k: usize) -> Result<TridiagEigen> {
    let n = diag.len();
    if k == 0 || k > n {
        return Err(Error::argument(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    if off.len() + 1 != n {
        return Err(Error::argument(format!(
            "off-diagonal length {} does not match dimension {n}",
            off.len()
        )));
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::domain("tridiagonal entries must be finite"));
    }
    let values: Vec<f64> = (0..k).map(|j| bisect_eigenvalue(diag, off, j)).collect();
    let (glo, ghi) = gershgorin(diag, off);
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let pivot_floor = f64::EPSILON * scale * 1e-3;
    let cluster_tol = 1e-10 * scale;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let start = (0..j)
            .rev()
            .take_while(|&i| values[j] - values[i] <= cluster_tol)
            .last();
        let v = match start {
            None => twisted_vector(diag, off, values[j], pivot_floor),
            Some(s) => {
                let prev: Vec<&Vec<f64>> = vectors[s..j].iter().collect();
                cluster_vector(diag, off, values[j], &prev, scale)
            }
        };
        vectors.push(v);
    }
    Ok(TridiagEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut y = (diag[i] - lambda) * v[i];
                if i > 0 {
                    y += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += off[i] * v[i + 1];
                }
                y * y
            })
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn three_by_three_closed_form() {
        let e = symm_tridiag_lowest(&[2.0, 2.0, 2.0], &[-1.0, -1.0], 3).unwrap();
        let s = 2f64.sqrt();
        for (got, want) in e.values.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&[2.0; 3], &[-1.0; 2], *l, v) < 1e-14);
        }
    }

    #[test]
    fn discrete_dirichlet_laplacian() {
        let n = 100;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let e = symm_tridiag_lowest(&diag, &off, 4).unwrap();
        for j in 0..4 {
            let exact = 4.0 * ((j + 1) as f64 * PI / (2.0 * (n + 1) as f64)).sin().powi(2);
            assert!((e.values[j] - exact).abs() < 1e-14, "j={j}");
        }
        // Scaled by (n+1)^2 the lowest value approaches pi^2.
        let scaled = e.values[0] * ((n + 1) * (n + 1)) as f64;
        assert!((scaled - PI * PI).abs() / (PI * PI) < 1e-3);
    }

    #[test]
    fn identity_gives_orthonormal_pair() {
        let e = symm_tridiag_lowest(&[1.0; 5], &[0.0; 4], 2).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let dot: f64 = e.vectors[0].iter().zip(&e.vectors[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn rejects_too_many_pairs() {
        assert!(symm_tridiag_lowest(&[1.0, 2.0], &[0.5], 3).is_err());
        assert!(symm_tridiag_lowest(&[1.0, 2.0], &[0.5, 0.1], 1).is_err());
    }

    #[test]
    fn tail_components_keep_relative_accuracy() {
        // -u'' + x^2 u on [0, 12] with u(0) = 0: ground state x exp(-x^2/2).
        let n = 6000;
        let dx = 12.0 / (n + 1) as f64;
        let diag: Vec<f64> = (1..=n).map(|i| 2.0 / (dx * dx) + (i as f64 * dx).powi(2)).collect();
        let off = vec![-1.0 / (dx * dx); n - 1];
        let e = symm_tridiag_lowest(&diag, &off, 1).unwrap();
        let v = &e.vectors[0];
        let sign = v[0].signum();
        // Ratio of successive entries deep in the tail follows the discrete
        // recurrence exactly; check positivity and monotone decay there.
        let i0 = (9.0 / dx) as usize;
        for i in i0..n - 1 {
            assert!(sign * v[i] > 0.0 && sign * v[i + 1] < sign * v[i]);
        }
        let x = i0 as f64 * dx + dx;
        let ln_ratio = (v[i0] / v[0]).abs().ln();
        let want = (x / dx).ln() - x * x / 2.0;
        assert!((ln_ratio - want).abs() < 1e-3 * x * x, "ln ratio {ln_ratio} vs {want}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn matches_dense_oracle(d in proptest::collection::vec(-5.0f64..5.0, 50),
                                o in proptest::collection::vec(-2.0f64..2.0, 49)) {
            let e = symm_tridiag_lowest(&d, &o, 5).unwrap();
            let mut m = DMatrix::<f64>::zeros(50, 50);
            for i in 0..50 {
                m[(i, i)] = d[i];
                if i < 49 {
                    m[(i, i + 1)] = o[i];
                    m[(i + 1, i)] = o[i];
                }
            }
            let mut dense: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            dense.sort_by(f64::total_cmp);
            for (j, want) in dense.iter().take(5).enumerate() {
                prop_assert!((e.values[j] - want).abs() < 1e-9);
                prop_assert!(residual(&d, &o, e.values[j], &e.vectors[j]) < 1e-8);
            }
        }
    }
}
