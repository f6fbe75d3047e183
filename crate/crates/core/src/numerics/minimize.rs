//! One-dimensional minimisation: uniform pre-scan followed by Brent refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum1D {
    pub argmin: f64,
    pub value: f64,
    /// Width of the final bracket around `argmin`.
    pub bracket: f64,
}

const PRESCAN: usize = 200;
const GOLDEN: f64 = 0.381_966_011_250_105_1;
/// Values closer than this are treated as ties; the smaller abscissa wins.
const TIE: f64 = 1e-10;

/// Brent's method on `[lo, hi]` starting from `x0`.
fn brent<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, x0: f64, tol: f64) -> Minimum1D {
    let mut x = x0;
    let mut w = x0;
    let mut v = x0;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = 0.25 * tol + 1e-15 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum1D {
        argmin: x,
        value: fx,
        bracket: b - a,
    }
}

fn validate(lo: f64, hi: f64, tol: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("minimisation needs a finite bracket lo < hi, got [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::argument("minimisation tolerance must be positive"));
    }
    Ok(())
}

fn scan<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..=PRESCAN)
        .map(|i| lo + (hi - lo) * i as f64 / PRESCAN as f64)
        .collect();
    let ys = xs.iter().map(|&x| f(x)).collect();
    (xs, ys)
}

fn refine<F: Fn(f64) -> f64>(f: &F, xs: &[f64], ys: &[f64], i: usize, tol: f64) -> Minimum1D {
    let n = xs.len();
    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(n - 1)];
    let mut m = brent(f, a, b, xs[i], tol);
    // Never return something worse than the sampled point itself.
    if ys[i] < m.value {
        m.argmin = xs[i];
        m.value = ys[i];
    }
    m.bracket = m.bracket.min(tol);
    m
}

/// Global minimiser of `f` on `[lo, hi]`: a 200-interval pre-scan selects the
/// basin, Brent refines it. Ties within 1e-10 resolve to the smallest abscissa.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum1D> {
    validate(lo, hi, tol)?;
    let basins = find_basins(&f, lo, hi, tol)?;
    let best = basins
        .iter()
        .fold(f64::INFINITY, |acc, m| acc.min(m.value));
    basins
        .into_iter()
        .find(|m| m.value <= best + TIE)
        .ok_or_else(|| Error::Convergence("minimisation found no finite sample".into()))
}

/// Every local minimum visible on the pre-scan, each refined by Brent,
/// ordered by abscissa.
pub fn find_basins<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Vec<Minimum1D>> {
    validate(lo, hi, tol)?;
    let (xs, ys) = scan(&f, lo, hi);
    let n = xs.len();
    let mut out = Vec::new();
    for i in 0..n {
        if !ys[i].is_finite() {
            continue;
        }
        let left_ok = i == 0 || ys[i] <= ys[i - 1] || !ys[i - 1].is_finite();
        let right_ok = i == n - 1 || ys[i] < ys[i + 1] || !ys[i + 1].is_finite();
        if left_ok && right_ok {
            out.push(refine(&f, &xs, &ys, i, tol));
        }
    }
    if out.is_empty() {
        return Err(Error::Convergence("minimisation found no finite sample".into()));
    }
    Ok(out)
}
