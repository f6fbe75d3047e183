//! Agmon distance of a single well and the action constants built from it.
//!
//! `d(r) = int_0^r sqrt(rho^2/4 + v0(rho) + depth) d rho`. Inside the support
//! `d` is tabulated by Gauss–Kronrod on a fine grid and interpolated with
//! cubic Hermite polynomials whose slopes are the exact integrand; outside
//! the support the integral is elementary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{find_basins, integrate, minimize_1d, Minimum1D, QuadratureSpec};
use crate::potential::{DoubleWellConfig, RadialWell};

const NODES: usize = 4000;
/// Abscissa tolerance of every variational minimisation.
pub const MIN_TOL: f64 = 1e-8;

/// Value with an attached absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalAction {
    pub action: Action,
    /// Infimum of the variational form, with its minimiser.
    pub variational: Minimum1D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatReport {
    pub action: Action,
    pub r0: f64,
    /// Every local minimum of `g0` on `[0, a]`.
    pub basins: Vec<Minimum1D>,
    /// Whether `v0' >= -L/4` holds, which makes `r0` unique.
    pub unimodal_hypothesis: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaReport {
    /// `S0 - Sa`.
    pub value: f64,
    /// The same quantity from its own single integral.
    pub direct: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub c_l: f64,
    /// `int_0^L sqrt(rho^2/4 + depth) d rho`.
    pub free_action: f64,
    /// `free_action - c_l`.
    pub lower: f64,
}

/// Pointwise integrand of `d` given `v0(rho)` and the depth.
#[inline]
pub fn agmon_integrand(v0: f64, depth: f64, rho: f64) -> f64 {
    (0.25 * rho * rho + v0 + depth).max(0.0).sqrt()
}

/// `int_0^rho sqrt(s^2/4 + c) ds`.
#[inline]
pub fn free_tail(rho: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.25 * rho * rho;
    }
    0.25 * rho * (rho * rho + 4.0 * c).sqrt() + c * (rho / (2.0 * c.sqrt())).asinh()
}

#[derive(Debug, Clone)]
pub struct AgmonProfile {
    config: DoubleWellConfig,
    quadrature: QuadratureSpec,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    d_error: f64,
}

impl AgmonProfile {
    pub fn new(config: DoubleWellConfig) -> Result<Self> {
        Self::with_quadrature(config, QuadratureSpec::with_tolerances(1e-15, 1e-13))
    }

    pub fn with_quadrature(config: DoubleWellConfig, quadrature: QuadratureSpec) -> Result<Self> {
        let well = config.well().clone();
        let a = well.a();
        let depth = well.depth();
        let step = a / NODES as f64;
        let f = |rho: f64| agmon_integrand(well.value(rho), depth, rho);
        let mut values = Vec::with_capacity(NODES + 1);
        let mut slopes = Vec::with_capacity(NODES + 1);
        let mut acc = 0.0;
        let mut err = 0.0;
        values.push(0.0);
        slopes.push(f(0.0));
        for i in 0..NODES {
            let lo = i as f64 * step;
            let hi = if i + 1 == NODES { a } else { lo + step };
            let piece = integrate(f, lo, hi, &quadrature)?;
            acc += piece.value;
            err += piece.error;
            values.push(acc);
            slopes.push(f(hi));
        }
        let d_error = err + 8.0 * f64::EPSILON * acc.max(1.0);
        Ok(Self {
            config,
            quadrature,
            step,
            values,
            slopes,
            d_error,
        })
    }

    pub fn config(&self) -> &DoubleWellConfig {
        &self.config
    }

    pub fn well(&self) -> &RadialWell {
        self.config.well()
    }

    pub fn l(&self) -> f64 {
        self.config.l()
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quadrature
    }

    /// Absolute error bound carried by every value of `d`.
    pub fn d_error(&self) -> f64 {
        self.d_error
    }

    /// `d(r)` for `r >= 0` (negative radii are mirrored).
    pub fn d(&self, r: f64) -> f64 {
        let r = r.abs();
        let a = self.well().a();
        if r >= a {
            let c = self.well().depth();
            return self.values[NODES] + free_tail(r, c) - free_tail(a, c);
        }
        let x = r / self.step;
        let i = (x.floor() as usize).min(NODES - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// `d'(r)`, the integrand itself.
    pub fn d_prime(&self, r: f64) -> f64 {
        let r = r.abs();
        agmon_integrand(self.well().value(r), self.well().depth(), r)
    }

    pub fn agmon_d(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::domain(format!("Agmon distance requires r >= 0, got {r}")));
        }
        Ok(self.d(r))
    }

    /// The magnetic Agmon distance between a well centre and its support edge.
    pub fn d_mag(&self) -> f64 {
        self.values[NODES]
    }

    fn action(&self, value: f64, terms: f64) -> Action {
        Action {
            value,
            error_bound: terms * self.d_error,
        }
    }

    /// `g0(r) = L r / 2 + d(L - r) + d(r)`.
    pub fn action_g0(&self, r: f64) -> f64 {
        let l = self.l();
        0.5 * l * r + self.d(l - r) + self.d(r)
    }

    /// `g(r, eps) = (1 - eps) L r / 2 + d(sqrt((L - r)^2 + 2 eps L r)) + d(r)`.
    pub fn action_g(&self, r: f64, eps: f64) -> f64 {
        let l = self.l();
        let rho = ((l - r) * (l - r) + 2.0 * eps * l * r).sqrt();
        0.5 * (1.0 - eps) * l * r + self.d(rho) + self.d(r)
    }

    pub fn action_s0(&self) -> Result<VariationalAction> {
        let l = self.l();
        let variational = minimize_1d(|u| self.d(u) + self.d(l + u), 0.0, self.well().a(), MIN_TOL)?;
        Ok(VariationalAction {
            action: self.action(self.d(l), 1.0),
            variational,
        })
    }

    pub fn action_sa(&self) -> Result<VariationalAction> {
        let l = self.l();
        let a = self.well().a();
        let variational = minimize_1d(|u| self.d(u) + self.d(l - u), 0.0, a, MIN_TOL)?;
        Ok(VariationalAction {
            action: self.action(self.d(l - a) + self.d(a), 2.0),
            variational,
        })
    }

    /// Whether `v0'(r) >= -L/4` on `[0, a]`.
    pub fn unimodal_hypothesis(&self) -> bool {
        let a = self.well().a();
        let bound = -0.25 * self.l();
        (0..=2000).all(|i| self.well().derivative(a * i as f64 / 2000.0) >= bound)
    }

    pub fn action_shat(&self) -> Result<ShatReport> {
        let a = self.well().a();
        let basins = find_basins(|r| self.action_g0(r), 0.0, a, MIN_TOL)?;
        let best = minimize_1d(|r| self.action_g0(r), 0.0, a, MIN_TOL)?;
        let r0 = best.argmin;
        if !(r0 > 1e-6 && r0 < a - 1e-6) {
            return Err(Error::Invariant(format!("minimiser of g0 at r0 = {r0} is not interior to (0, a)")));
        }
        Ok(ShatReport {
            action: self.action(best.value, 2.0),
            r0,
            basins,
            unimodal_hypothesis: self.unimodal_hypothesis(),
        })
    }

    /// `S(eps) = min_r g(r, eps)` and its minimiser.
    pub fn action_s_eps(&self, eps: f64) -> Result<(Action, f64)> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::domain(format!("eps must lie in (0, 1], got {eps}")));
        }
        let m = minimize_1d(|r| self.action_g(r, eps), 0.0, self.well().a(), MIN_TOL)?;
        Ok((self.action(m.value, 2.0), m.argmin))
    }

    pub fn remainder_ra(&self) -> Result<RaReport> {
        let well = self.well();
        let (a, depth, l) = (well.a(), well.depth(), self.l());
        if 2.0 * a >= l {
            return Err(Error::Hypothesis("remainder needs 2a < L".into()));
        }
        let value = self.d(l) - self.d(l - a) - self.d(a);
        let direct = integrate(
            |rho| {
                let outer = (0.25 * (l - rho) * (l - rho) + depth).sqrt();
                outer - agmon_integrand(well.value(rho), depth, rho)
            },
            0.0,
            a,
            &self.quadrature,
        )?
        .value;
        let upper_bound = (0.5 * (l - a) + depth.sqrt()) * a;
        if !(value > 0.0 && value <= upper_bound) {
            return Err(Error::Invariant(format!(
                "remainder Ra = {value} outside (0, {upper_bound}]"
            )));
        }
        Ok(RaReport {
            value,
            direct,
            upper_bound,
        })
    }

    pub fn corridor_cl(&self) -> Corridor {
        let well = self.well();
        let (a, depth, l) = (well.a(), well.depth(), self.l());
        let c_l = (0.5 * (l - a) + 2.0 * depth.sqrt()) * a;
        let free_action = free_tail(l, depth);
        Corridor {
            c_l,
            free_action,
            lower: free_action - c_l,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::RadialWell;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn canonical() -> AgmonProfile {
        AgmonProfile::new(DoubleWellConfig::canonical()).unwrap()
    }

    fn midpoint_d(well: &RadialWell, r: f64, n: usize) -> f64 {
        let h = r / n as f64;
        (0..n)
            .map(|i| {
                let rho = (i as f64 + 0.5) * h;
                agmon_integrand(well.value(rho), well.depth(), rho)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn origin_and_negative_radius() {
        let p = canonical();
        assert_eq!(p.agmon_d(0.0).unwrap(), 0.0);
        assert!(p.agmon_d(-1.0).is_err());
    }

    #[test]
    fn zero_depth_integrand_gives_quarter_square() {
        for &r in &[0.5, 1.0, 3.0] {
            let q = integrate(|rho| agmon_integrand(0.0, 0.0, rho), 0.0, r, &QuadratureSpec::default()).unwrap();
            assert_relative_eq!(q.value, r * r / 4.0, epsilon = 1e-14);
            assert_relative_eq!(free_tail(r, 0.0), r * r / 4.0);
        }
    }

    #[test]
    fn support_value_matches_midpoint_oracle() {
        let p = canonical();
        let oracle = midpoint_d(p.well(), 1.0, 100_000);
        assert!(p.d(1.0) > 0.0);
        assert!((p.d(1.0) - oracle).abs() < 1e-9);
    }

    #[test]
    fn interpolation_between_nodes() {
        let p = canonical();
        for &r in &[0.123_456_7, 0.5, 0.777_777, 0.999_9] {
            assert!((p.d(r) - midpoint_d(p.well(), r, 200_000)).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn tail_derivative_is_integrand() {
        for &c in &[0.3, 1.0, 4.0] {
            for &rho in &[0.5, 2.0, 7.0] {
                let s = 1e-5;
                let fd = (free_tail(rho + s, c) - free_tail(rho - s, c)) / (2.0 * s);
                assert!((fd - (0.25 * rho * rho + c).sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn s0_and_its_variational_form() {
        let p = canonical();
        let s0 = p.action_s0().unwrap();
        assert_relative_eq!(s0.action.value, p.d(4.0));
        assert!((s0.action.value - s0.variational.value).abs() < 1e-8);
        assert!(s0.variational.argmin <= 1.0 / 200.0);
        // S0 < L^2/4 + sqrt(depth) L
        assert!(s0.action.value < 4.0 + 4.0);
    }

    #[test]
    fn sa_and_its_variational_form() {
        let p = canonical();
        let sa = p.action_sa().unwrap();
        assert_relative_eq!(sa.action.value, p.d(3.0) + p.d(1.0));
        assert!((sa.action.value - sa.variational.value).abs() < 1e-8);
        assert!(sa.variational.argmin >= 1.0 - 1.0 / 200.0);
        // Sa > ((L - a)^2 - a^2) / 4
        assert!(sa.action.value > (9.0 - 1.0) / 4.0);
    }

    #[test]
    fn shat_ordering_and_interior_minimiser() {
        let p = canonical();
        let sa = p.action_sa().unwrap().action.value;
        let s0 = p.action_s0().unwrap().action.value;
        let shat = p.action_shat().unwrap();
        assert!(shat.unimodal_hypothesis);
        assert_eq!(shat.basins.len(), 1);
        assert!(sa < shat.action.value);
        assert!(shat.action.value < s0.min(sa + 4.0 * 1.0 / 2.0));
        assert!(shat.r0 > 1e-6 && shat.r0 < 1.0 - 1e-6);
    }

    #[test]
    fn s_eps_monotone_and_converges_to_shat() {
        let p = canonical();
        let shat = p.action_shat().unwrap();
        let mut last = f64::INFINITY;
        for &eps in &[1.0, 0.5, 0.1, 0.05, 0.01] {
            let (s, r) = p.action_s_eps(eps).unwrap();
            assert!(s.value >= shat.action.value - 1e-12);
            assert!(s.value <= last + 1e-12);
            last = s.value;
            if eps == 0.01 {
                assert!((r - shat.r0).abs() < 1e-3 * 5.0);
            }
        }
        assert!(p.action_s_eps(0.0).is_err());
        assert!(p.action_s_eps(1.5).is_err());
    }

    #[test]
    fn ra_identity_and_bound() {
        let p = canonical();
        let ra = p.remainder_ra().unwrap();
        let s0 = p.action_s0().unwrap().action.value;
        let sa = p.action_sa().unwrap().action.value;
        assert!((ra.value - (s0 - sa)).abs() < 1e-12);
        assert!((ra.direct - ra.value).abs() < 1e-8);
        assert!(ra.value > 0.0 && ra.value <= ra.upper_bound);
    }

    #[test]
    fn corridor_constant() {
        let p = canonical();
        let c = p.corridor_cl();
        assert_relative_eq!(c.c_l, 3.5);
        assert_relative_eq!(c.free_action, 2.0 * 5f64.sqrt() + (2.0 + 5f64.sqrt()).ln(), epsilon = 1e-14);
        let s0 = p.action_s0().unwrap().action.value;
        let sa = p.action_sa().unwrap().action.value;
        assert!(-c.free_action <= -s0 && -s0 <= -sa);
        let tiny = AgmonProfile::new(DoubleWellConfig::new(RadialWell::bump(1.0, 1e-6).unwrap(), 4.0).unwrap()).unwrap();
        assert!(tiny.corridor_cl().c_l < 1e-5);
    }

    #[test]
    fn integrand_envelope() {
        let p = canonical();
        for i in 0..=500 {
            let rho = 6.0 * i as f64 / 500.0;
            let f = p.d_prime(rho);
            assert!(f >= rho / 2.0 - 1e-15 && f <= rho / 2.0 + 1.0 + 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn chain_holds_for_random_wells(depth in 0.3f64..3.0, a in 0.4f64..1.5, gap in 0.5f64..4.0) {
            let l = 2.0 * a + gap;
            let p = AgmonProfile::new(DoubleWellConfig::new(RadialWell::bump(depth, a).unwrap(), l).unwrap()).unwrap();
            let sa = p.action_sa().unwrap();
            let s0 = p.action_s0().unwrap();
            let shat = p.action_shat().unwrap();
            prop_assert!(sa.action.value < shat.action.value);
            prop_assert!(shat.action.value < s0.action.value);
            prop_assert!(shat.action.value < sa.action.value + l * a / 2.0);
            prop_assert!((sa.action.value - sa.variational.value).abs() < 1e-8);
            prop_assert!((s0.action.value - s0.variational.value).abs() < 1e-8);
            for i in 0..20 {
                let r = a * i as f64 / 19.0;
                for &eps in &[0.1, 0.5, 1.0] {
                    prop_assert!(p.action_g(r, eps) >= p.action_g0(r) - 1e-12);
                }
            }
            let mut prev = -1.0;
            for i in 0..=400 {
                let d = p.d(2.0 * l * i as f64 / 400.0);
                prop_assert!(d > prev);
                prev = d;
            }
        }
    }
}
