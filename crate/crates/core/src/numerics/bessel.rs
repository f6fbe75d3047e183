//! Modified Bessel function of the first kind, order zero.
//!
//! Below `SWITCH` the power series is summed directly (all terms positive, no
//! cancellation). Above it the large-argument expansion is used in log form so
//! arguments in the thousands never overflow.

use crate::error::{Error, Result};

pub const SWITCH: f64 = 20.0;

fn series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `ln(1 + sum_k ((2k-1)!!)^2 / (k! 8^k z^k))`, truncated at the smallest term.
fn asymptotic_log_correction(z: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
        if next >= term || next < 1e-18 {
            if next < term {
                sum += next;
            }
            return sum.ln_1p();
        }
        term = next;
        sum += term;
        k += 1.0;
    }
}

fn check(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::domain(format!("I0 requires z >= 0, got {z}")));
    }
    Ok(())
}

/// `ln I0(z)` for `z >= 0`.
pub fn ln_bessel_i0(z: f64) -> Result<f64> {
    check(z)?;
    Ok(ln_i0_unchecked(z))
}

pub(crate) fn ln_i0_unchecked(z: f64) -> f64 {
    if z <= SWITCH {
        series(z).ln()
    } else {
        z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + asymptotic_log_correction(z)
    }
}

/// `I0(z)` for `z >= 0`; overflows to `+inf` beyond `z ~ 713`, use
/// [`ln_bessel_i0`] there.
pub fn bessel_i0(z: f64) -> Result<f64> {
    check(z)?;
    Ok(if z <= SWITCH { series(z) } else { ln_i0_unchecked(z).exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `ln I0(z)` from `(1/pi) int_0^pi exp(z cos t) dt`, periodic trapezoid
    /// rule (spectrally accurate), with `exp(z)` factored out.
    fn trapezoid_ln_i0(z: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (-2.0 * z).exp());
        for j in 1..n {
            s += (z * ((j as f64 * h).cos() - 1.0)).exp();
        }
        z + (s * h / PI).ln()
    }

    #[test]
    fn constant_term() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn value_at_one() {
        let v = bessel_i0(1.0).unwrap();
        assert!((v - trapezoid_ln_i0(1.0).exp()).abs() < 1e-14);
        assert!((v - 1.266_065_8).abs() < 1e-7);
    }

    #[test]
    fn both_branches_match_integral_oracle() {
        for &z in &[0.1, 2.5, 10.0, 19.9, 20.1, 35.0, 50.0, 120.0, 500.0] {
            let lhs = ln_bessel_i0(z).unwrap();
            let rhs = trapezoid_ln_i0(z);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn switch_is_continuous() {
        let below = series(SWITCH).ln();
        let above = SWITCH - 0.5 * (2.0 * PI * SWITCH).ln() + asymptotic_log_correction(SWITCH);
        assert!((below - above).abs() < 1e-13);
    }

    #[test]
    fn large_argument_leading_order() {
        let z = 500.0;
        let lead = z - 0.5 * (2.0 * PI * z).ln();
        let diff = ln_bessel_i0(z).unwrap() - lead;
        // First correction is ln(1 + 1/(8z)).
        assert!((diff - (1.0 / (8.0 * z)).ln_1p()).abs() < 1e-5);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(bessel_i0(-1.0).is_err());
        assert!(ln_bessel_i0(f64::NAN).is_err());
    }

    #[test]
    fn exponential_envelope() {
        // c1 e^z / (sqrt(2 pi z) + 1) <= I0(z) <= c2 e^z / (sqrt(2 pi z) + 1);
        // the ratio peaks near 1.80 around z = 0.35 and tends to 1.
        let (c1, c2) = (0.9, 1.85);
        for i in 0..=4000 {
            let z = i as f64 * 0.05;
            let ratio = (ln_bessel_i0(z).unwrap() - z).exp() * ((2.0 * PI * z).sqrt() + 1.0);
            assert!(ratio >= c1 && ratio <= c2, "z={z}: ratio {ratio}");
        }
        // Crude bound used by the hopping envelope.
        for i in 0..=4000 {
            let z = i as f64 * 0.05;
            assert!(ln_bessel_i0(z).unwrap() <= z);
        }
    }
}
