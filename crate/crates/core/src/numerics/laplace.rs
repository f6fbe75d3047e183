//! Integrals of `exp(log_f)` whose integrands span hundreds of e-folds.
//!
//! The peak of `log_f` is located on a scan and refined, the integration
//! window is cut where `log_f` has dropped a fixed number of units below its
//! maximum, and the rescaled integrand `exp(log_f - max)` is handed to the
//! adaptive quadrature. The result is returned as a logarithm.

use serde::{Deserialize, Serialize};

use super::minimize::minimize_1d;
use super::quadrature::{integrate, QuadratureSpec, Transform};
use super::roots::find_root;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogIntegral {
    pub ln_value: f64,
    /// Relative error estimate of `exp(ln_value)`.
    pub rel_error: f64,
}

impl LogIntegral {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

const SCAN: usize = 2000;

/// `ln int_lo^hi exp(log_f(t)) dt`, with `hi` possibly `+inf` (handled by the
/// map `t = lo + s/(1-s)`). Contributions more than `drop` e-folds below the
/// peak are discarded.
pub fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    lo: f64,
    hi: f64,
    drop: f64,
    spec: &QuadratureSpec,
) -> Result<LogIntegral> {
    if !(lo < hi) || !lo.is_finite() || hi.is_nan() {
        return Err(Error::domain(format!("log integration needs lo < hi, got [{lo}, {hi}]")));
    }
    if !(drop > 0.0) {
        return Err(Error::argument("window drop must be positive"));
    }
    if hi.is_infinite() {
        let mapped = |s: f64| {
            let one_minus = 1.0 - s;
            if one_minus <= 0.0 {
                return f64::NEG_INFINITY;
            }
            log_f(lo + s / one_minus) - 2.0 * one_minus.ln()
        };
        windowed(&mapped, 0.0, 1.0, drop, spec)
    } else {
        windowed(&log_f, lo, hi, drop, spec)
    }
}

fn windowed<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, drop: f64, spec: &QuadratureSpec) -> Result<LogIntegral> {
    let step = (hi - lo) / SCAN as f64;
    let xs: Vec<f64> = (0..SCAN).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    if ys.iter().any(|y| y.is_nan() || *y == f64::INFINITY) {
        return Err(Error::domain("log integrand is NaN or +inf on the scan"));
    }
    let (imax, _) = ys
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &y)| if y > acc.1 { (i, y) } else { acc });
    if ys[imax] == f64::NEG_INFINITY {
        return Ok(LogIntegral {
            ln_value: f64::NEG_INFINITY,
            rel_error: 0.0,
        });
    }
    let a = if imax == 0 { lo } else { xs[imax - 1] };
    let b = if imax + 1 == SCAN { hi } else { xs[imax + 1] };
    let neg = |x: f64| {
        let v = g(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let refined = minimize_1d(neg, a, b, 1e-12 * (hi - lo).max(1.0))?;
    let (peak, peak_log) = if -refined.value > ys[imax] {
        (refined.argmin, -refined.value)
    } else {
        (xs[imax], ys[imax])
    };
    let threshold = peak_log - drop;
    let first = ys.iter().position(|&y| y >= threshold).unwrap_or(imax);
    let last = ys.iter().rposition(|&y| y >= threshold).unwrap_or(imax);
    let cut = |x: f64| g(x) - threshold;
    let tol = 1e-10 * (hi - lo);
    let wl = if first == 0 {
        lo
    } else {
        find_root(cut, xs[first - 1], xs[first], tol).unwrap_or(xs[first - 1])
    };
    let wr = if last + 1 == SCAN {
        hi
    } else {
        find_root(cut, xs[last], xs[last + 1], tol).unwrap_or(xs[last + 1])
    };
    let inner = QuadratureSpec {
        transform: Transform::None,
        ..*spec
    };
    let scaled = |x: f64| {
        let v = g(x) - peak_log;
        if v.is_finite() {
            v.exp()
        } else {
            0.0
        }
    };
    let mut value = 0.0;
    let mut error = 0.0;
    let split = peak.clamp(wl, wr);
    for (p, q) in [(wl, split), (split, wr)] {
        if q > p {
            let r = integrate(scaled, p, q, &inner)?;
            value += r.value;
            error += r.error;
        }
    }
    if !(value > 0.0) {
        return Err(Error::Convergence("windowed log integral vanished".into()));
    }
    Ok(LogIntegral {
        ln_value: peak_log + value.ln(),
        rel_error: error / value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sharp_gaussian_far_below_underflow() {
        // int exp(-1000 - (x-3)^2 / (2 s^2)) = exp(-1000) s sqrt(2 pi)
        let s = 0.01;
        let r = integrate_log(
            |x| -1000.0 - (x - 3.0).powi(2) / (2.0 * s * s),
            0.0,
            10.0,
            50.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let want = -1000.0 + (s * (2.0 * PI).sqrt()).ln();
        assert!((r.ln_value - want).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        // int_0^inf t^4 e^{-t} dt = 24
        let r = integrate_log(
            |t: f64| 4.0 * t.ln() - t,
            0.0,
            f64::INFINITY,
            50.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.ln_value - 24f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn huge_exponent_does_not_overflow() {
        // int_0^1 e^{2000 x} dx = (e^{2000} - 1)/2000
        let r = integrate_log(|x| 2000.0 * x, 0.0, 1.0, 60.0, &QuadratureSpec::default()).unwrap();
        assert!((r.ln_value - (2000.0 - 2000f64.ln())).abs() < 1e-10);
    }
}
