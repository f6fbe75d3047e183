//! Radial single wells and the symmetric double well built from them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `-depth * exp(1 - 1/(1 - (r/a)^2))` inside the support.
    Bump,
    Custom(ProfileFn),
}

/// A compactly supported radial well with a unique nondegenerate minimum at
/// the origin.
#[derive(Clone)]
pub struct RadialWell {
    a: f64,
    depth: f64,
    curvature: f64,
    quartic: f64,
    strictly_negative: bool,
    kind: Kind,
}

impl fmt::Debug for RadialWell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let profile = match self.kind {
            Kind::Bump => "bump",
            Kind::Custom(_) => "custom",
        };
        f.debug_struct("RadialWell")
            .field("profile", &profile)
            .field("depth", &self.depth)
            .field("a", &self.a)
            .field("curvature", &self.curvature)
            .finish()
    }
}

/// JSON form of a well: `{"profile":"bump","depth":1.0,"a":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellDescriptor {
    pub profile: String,
    pub depth: f64,
    pub a: f64,
}

impl RadialWell {
    pub fn bump(depth: f64, a: f64) -> Result<Self> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::Hypothesis(format!("well depth must be positive, got {depth}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Hypothesis(format!("support radius must be positive, got {a}")));
        }
        Ok(Self {
            a,
            depth,
            curvature: 2.0 * depth / (a * a),
            quartic: depth / (2.0 * a.powi(4)),
            strictly_negative: true,
            kind: Kind::Bump,
        })
    }

    /// A user-supplied profile on `[0, inf)`, validated on a fine scan:
    /// zero beyond `a`, unique minimum at the origin, positive curvature.
    pub fn custom<F>(a: f64, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Hypothesis(format!("support radius must be positive, got {a}")));
        }
        let vmin = profile(0.0);
        if !(vmin < 0.0 && vmin.is_finite()) {
            return Err(Error::Hypothesis(format!("v0(0) must be negative, got {vmin}")));
        }
        let n = 4000;
        let mut strictly_negative = true;
        for i in 1..=n {
            let r = a * i as f64 / n as f64;
            let v = profile(r);
            if !v.is_finite() {
                return Err(Error::Hypothesis(format!("v0({r}) is not finite")));
            }
            if v <= vmin {
                return Err(Error::Hypothesis(format!(
                    "v0 has no unique minimum at the origin (v0({r}) = {v} <= {vmin})"
                )));
            }
            if i < n && v >= 0.0 {
                strictly_negative = false;
            }
        }
        for i in 0..=n {
            let r = a * (1.0 + 3.0 * i as f64 / n as f64);
            if profile(r) != 0.0 {
                return Err(Error::Hypothesis(format!("v0 must vanish for r >= a, but v0({r}) != 0")));
            }
        }
        let step = 1e-4 * a;
        let curvature = 2.0 * (profile(step) - vmin) / (step * step);
        if !(curvature > 0.0) {
            return Err(Error::Hypothesis("v0''(0) must be positive".into()));
        }
        // Taylor coefficients c2 + c4 s + c6 s^2 (s = r^2) through three radii.
        let s: [f64; 3] = [0.02, 0.04, 0.06].map(|x: f64| (x * a).powi(2));
        let e = s.map(|si| (profile(si.sqrt()) - vmin) / si);
        let d01 = (e[1] - e[0]) / (s[1] - s[0]);
        let d12 = (e[2] - e[1]) / (s[2] - s[1]);
        let c6 = (d12 - d01) / (s[2] - s[0]);
        let quartic = d01 - c6 * (s[0] + s[1]);
        let curvature = 2.0 * (e[0] - quartic * s[0] - c6 * s[0] * s[0]);
        Ok(Self {
            a,
            depth: -vmin,
            curvature,
            quartic,
            strictly_negative,
            kind: Kind::Custom(Arc::new(profile)),
        })
    }

    pub fn from_descriptor(d: &WellDescriptor) -> Result<Self> {
        match d.profile.as_str() {
            "bump" => Self::bump(d.depth, d.a),
            other => Err(Error::argument(format!("unknown well profile '{other}'"))),
        }
    }

    /// Descriptor of a built-in profile; `None` for custom wells.
    pub fn descriptor(&self) -> Option<WellDescriptor> {
        match self.kind {
            Kind::Bump => Some(WellDescriptor {
                profile: "bump".into(),
                depth: self.depth,
                a: self.a,
            }),
            Kind::Custom(_) => None,
        }
    }

    /// Same family with the depth multiplied by `factor`.
    pub fn scaled_depth(&self, factor: f64) -> Result<Self> {
        match &self.kind {
            Kind::Bump => Self::bump(self.depth * factor, self.a),
            Kind::Custom(f) => {
                let f = Arc::clone(f);
                Self::custom(self.a, move |r| factor * f(r))
            }
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// `v0^min = -depth`.
    pub fn v_min(&self) -> f64 {
        -self.depth
    }

    /// `v0''(0)`.
    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    /// Coefficient of `r^4` in the Taylor expansion of `v0` at the origin.
    pub fn quartic_coefficient(&self) -> f64 {
        self.quartic
    }

    /// `sqrt(1 + 2 v0''(0))`.
    pub fn e1(&self) -> f64 {
        (1.0 + 2.0 * self.curvature).sqrt()
    }

    pub fn is_strictly_negative(&self) -> bool {
        self.strictly_negative
    }

    /// `v0(r)` without the sign check; `r` is taken as `|r|`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.a {
            return 0.0;
        }
        match &self.kind {
            Kind::Bump => {
                let x = r / self.a;
                -self.depth * (1.0 - 1.0 / (1.0 - x * x)).exp()
            }
            Kind::Custom(f) => f(r),
        }
    }

    /// `v0'(r)` for `r >= 0`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.a {
            return 0.0;
        }
        match &self.kind {
            Kind::Bump => {
                let x = r / self.a;
                let q = 1.0 - x * x;
                -self.value(r) * 2.0 * x / (self.a * q * q)
            }
            Kind::Custom(f) => {
                let s = 1e-6 * self.a;
                if r < s {
                    return self.curvature * r;
                }
                (f(r + s) - f(r - s)) / (2.0 * s)
            }
        }
    }

    pub fn eval_v0(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::domain(format!("v0 requires r >= 0, got {r}")));
        }
        Ok(self.value(r))
    }
}

/// Two copies of a radial well centred at `(-L/2, 0)` and `(L/2, 0)`.
#[derive(Debug, Clone)]
pub struct DoubleWellConfig {
    well: RadialWell,
    l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDescriptor {
    pub well: WellDescriptor,
    #[serde(rename = "L")]
    pub l: f64,
}

impl DoubleWellConfig {
    pub fn new(well: RadialWell, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 2.0 * well.a()) {
            return Err(Error::Hypothesis(format!(
                "well separation L = {l} must exceed 2a = {}",
                2.0 * well.a()
            )));
        }
        Ok(Self { well, l })
    }

    pub fn from_descriptor(d: &ConfigDescriptor) -> Result<Self> {
        Self::new(RadialWell::from_descriptor(&d.well)?, d.l)
    }

    pub fn canonical() -> Self {
        Self::new(RadialWell::bump(1.0, 1.0).expect("canonical well"), 4.0).expect("canonical config")
    }

    pub fn well(&self) -> &RadialWell {
        &self.well
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn left_center(&self) -> (f64, f64) {
        (-0.5 * self.l, 0.0)
    }

    pub fn right_center(&self) -> (f64, f64) {
        (0.5 * self.l, 0.0)
    }

    /// `L > 4 (sqrt(depth) + a)`.
    pub fn fsw_condition(&self) -> bool {
        self.l > 4.0 * (self.well.depth().sqrt() + self.well.a())
    }

    pub fn eval_v(&self, x: f64, y: f64) -> f64 {
        let half = 0.5 * self.l;
        self.well.value((x + half).hypot(y)) + self.well.value((x - half).hypot(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canonical() -> RadialWell {
        RadialWell::bump(1.0, 1.0).unwrap()
    }

    #[test]
    fn bump_values() {
        let w = canonical();
        assert_eq!(w.eval_v0(0.0).unwrap(), -1.0);
        assert_eq!(w.eval_v0(1.0).unwrap(), 0.0);
        // exp(1 - 1/0.75) = exp(-1/3)
        let v = w.eval_v0(0.5).unwrap();
        assert!((v + (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(v > -1.0 && v < 0.0);
        assert!(w.eval_v0(-0.1).is_err());
    }

    fn fd_curvature(w: &RadialWell) -> f64 {
        let s = 1e-4;
        (w.value(s) - 2.0 * w.value(0.0) + w.value(-s)) / (s * s)
    }

    #[test]
    fn curvature_matches_finite_differences() {
        for (depth, a, want) in [(1.0, 1.0, 2.0), (4.0, 1.0, 8.0), (1.0, 2.0, 0.5)] {
            let w = RadialWell::bump(depth, a).unwrap();
            assert_eq!(w.curvature(), want);
            assert!((fd_curvature(&w) - want).abs() < 1e-6 * want.max(1.0));
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let w = RadialWell::bump(1.5, 1.3).unwrap();
        for i in 1..60 {
            let r = 1.3 * i as f64 / 60.0;
            let s = 1e-6;
            let fd = (w.value(r + s) - w.value(r - s)) / (2.0 * s);
            assert!((w.derivative(r) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn unique_minimum_on_scan() {
        let w = canonical();
        for i in 1..=1000 {
            let r = i as f64 * 1e-3;
            assert!(w.value(r) > w.v_min() + 1e-12 || r < 1e-5);
        }
    }

    #[test]
    fn smooth_across_support_edge() {
        let w = canonical();
        assert!(w.value(1.0 - 1e-3).abs() < 1e-200);
        assert_eq!(w.value(1.0 + 1e-12), 0.0);
    }

    #[test]
    fn custom_wells_are_validated() {
        assert!(RadialWell::custom(1.0, |r| if r < 1.0 { -1.0 + r * r - r } else { 0.0 }).is_err());
        assert!(RadialWell::custom(1.0, |r| if r < 1.0 { -(1.0 - r * r).powi(3) } else { 0.0 }).is_ok());
        // Does not vanish beyond a.
        assert!(RadialWell::custom(1.0, |r| -(-r * r).exp()).is_err());
        let c = RadialWell::custom(1.0, |r| if r < 1.0 { -(1.0 - r * r).powi(3) } else { 0.0 }).unwrap();
        assert!((c.curvature() - 6.0).abs() < 1e-6);
        assert!((c.quartic_coefficient() + 3.0).abs() < 1e-6);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(RadialWell::bump(0.0, 1.0).is_err());
        assert!(RadialWell::bump(1.0, -1.0).is_err());
        assert!(DoubleWellConfig::new(canonical(), 2.0).is_err());
    }

    #[test]
    fn double_well_values_and_flags() {
        let c = DoubleWellConfig::canonical();
        let (xl, yl) = c.left_center();
        assert_eq!(c.eval_v(xl, yl), -1.0);
        assert_eq!(c.eval_v(0.0, 0.0), 0.0);
        assert!(!c.fsw_condition());
        assert!(DoubleWellConfig::new(canonical(), 8.5).unwrap().fsw_condition());
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"well":{"profile":"bump","depth":1.0,"a":1.0},"L":4.0}"#;
        let d: ConfigDescriptor = serde_json::from_str(json).unwrap();
        let c = DoubleWellConfig::from_descriptor(&d).unwrap();
        assert_eq!(c.l(), 4.0);
        assert_eq!(serde_json::to_string(&d).unwrap(), json);
        assert_eq!(c.well().descriptor().unwrap(), d.well);
    }

    proptest! {
        #[test]
        fn double_well_is_mirror_symmetric(x in -8.0f64..8.0, y in -4.0f64..4.0) {
            let c = DoubleWellConfig::new(canonical(), 4.0).unwrap();
            prop_assert_eq!(c.eval_v(x, y), c.eval_v(-x, y));
        }

        #[test]
        fn vanishes_outside_support(r in 1.0f64..100.0, depth in 0.1f64..10.0, a in 0.1f64..1.0) {
            let w = RadialWell::bump(depth, a).unwrap();
            prop_assert_eq!(w.value(r), 0.0);
        }
    }
}
