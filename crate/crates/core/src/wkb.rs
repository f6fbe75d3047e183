//! Leading WKB amplitude of the single-well ground state and the exact
//! integral representation of that ground state outside the well.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agmon::AgmonProfile;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_log, loglog_fit, PowerFit, QuadratureSpec};
use crate::potential::{DoubleWellConfig, RadialWell};
use crate::spectral::{ground_state_for, RadialEigenSolution};

/// Shifted potential `v(rho) - v_min` together with its Taylor data at 0.
#[derive(Clone)]
enum Shifted {
    Well(RadialWell),
    /// `mu rho^2` exactly.
    Quadratic { mu: f64 },
}

impl Shifted {
    fn value(&self, rho: f64) -> f64 {
        match self {
            Shifted::Well(w) => w.value(rho) + w.depth(),
            Shifted::Quadratic { mu } => mu * rho * rho,
        }
    }

    fn derivative(&self, rho: f64) -> f64 {
        match self {
            Shifted::Well(w) => w.derivative(rho),
            Shifted::Quadratic { mu } => 2.0 * mu * rho,
        }
    }

    fn curvature(&self) -> f64 {
        match self {
            Shifted::Well(w) => w.curvature(),
            Shifted::Quadratic { mu } => 2.0 * mu,
        }
    }

    fn quartic(&self) -> f64 {
        match self {
            Shifted::Well(w) => w.quartic_coefficient(),
            Shifted::Quadratic { .. } => 0.0,
        }
    }
}

const NODES_PER_UNIT: f64 = 2000.0;

/// Leading amplitude `a0(r) = a0(0) exp(-int_0^r f)`.
#[derive(Clone)]
pub struct WkbAmplitude {
    shifted: Shifted,
    e1: f64,
    kappa: f64,
    rho_cut: f64,
    a0_origin: f64,
    step: f64,
    /// `int_0^{r_k} f` on nodes `r_k = rho_cut + k step`.
    cumulative: Vec<f64>,
    f_nodes: Vec<f64>,
}

impl std::fmt::Debug for WkbAmplitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WkbAmplitude")
            .field("e1", &self.e1)
            .field("a0_origin", &self.a0_origin)
            .field("r_max", &self.r_max())
            .finish()
    }
}

/// `a0(0)` of the normalised harmonic limit: `sqrt(E1 / (2 pi))`.
pub fn a0_origin(curvature: f64) -> f64 {
    ((1.0 + 2.0 * curvature).sqrt() / (2.0 * PI)).sqrt()
}

impl WkbAmplitude {
    /// Amplitude of `well`, tabulated on `[0, r_max]`.
    pub fn new(well: &RadialWell, r_max: f64) -> Result<Self> {
        Self::build(Shifted::Well(well.clone()), well.a(), r_max)
    }

    /// Amplitude for the globally quadratic potential `v_min + mu r^2`.
    pub fn quadratic(mu: f64, r_max: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::domain("quadratic strength must be positive"));
        }
        Self::build(Shifted::Quadratic { mu }, 1.0, r_max)
    }

    fn build(shifted: Shifted, a: f64, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::domain("amplitude range must be positive"));
        }
        let curvature = shifted.curvature();
        let e1 = (1.0 + 2.0 * curvature).sqrt();
        let c2 = 0.25 * e1 * e1;
        let kappa = shifted.quartic() / c2;
        let rho_cut = 1e-2 * a;
        let n = ((r_max * NODES_PER_UNIT).ceil() as usize).max(400);
        let step = (r_max.max(rho_cut) - rho_cut) / n as f64;
        let mut this = Self {
            shifted,
            e1,
            kappa,
            rho_cut,
            a0_origin: a0_origin(curvature),
            step,
            cumulative: Vec::with_capacity(n + 1),
            f_nodes: Vec::with_capacity(n + 1),
        };
        let spec = QuadratureSpec::with_tolerances(1e-15, 1e-13);
        let mut acc = 0.5 * kappa * rho_cut * rho_cut;
        this.cumulative.push(acc);
        this.f_nodes.push(this.f(rho_cut));
        for k in 0..n {
            let lo = rho_cut + k as f64 * step;
            let piece = integrate(|r| this.f(r), lo, lo + step, &spec)?;
            acc += piece.value;
            this.cumulative.push(acc);
            this.f_nodes.push(this.f(lo + step));
        }
        Ok(this)
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn a0_at_origin(&self) -> f64 {
        self.a0_origin
    }

    pub fn r_max(&self) -> f64 {
        self.rho_cut + self.step * (self.cumulative.len() - 1) as f64
    }

    /// `f = u'/(4u) + 1/(2 rho) - E1/(2 sqrt u)`, `u = rho^2/4 + v0 - v_min`;
    /// below the cut the leading series `kappa rho` is used.
    pub fn f(&self, rho: f64) -> f64 {
        if rho < self.rho_cut {
            return self.kappa * rho;
        }
        let u = 0.25 * rho * rho + self.shifted.value(rho);
        let du = 0.5 * rho + self.shifted.derivative(rho);
        du / (4.0 * u) + 0.5 / rho - self.e1 / (2.0 * u.sqrt())
    }

    /// `int_0^r f`.
    pub fn integral_f(&self, r: f64) -> f64 {
        if r <= self.rho_cut {
            return 0.5 * self.kappa * r * r;
        }
        let n = self.cumulative.len() - 1;
        let x = ((r - self.rho_cut) / self.step).min(n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.cumulative[i], self.cumulative[i + 1]);
        let (m0, m1) = (self.f_nodes[i] * self.step, self.f_nodes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    pub fn ln_a0(&self, r: f64) -> f64 {
        self.a0_origin.ln() - self.integral_f(r.abs())
    }

    pub fn a0(&self, r: f64) -> f64 {
        self.ln_a0(r).exp()
    }

    pub fn amplitude_a0(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::domain(format!("amplitude requires r >= 0, got {r}")));
        }
        if r > self.r_max() {
            return Err(Error::domain(format!("r = {r} beyond tabulated range {}", self.r_max())));
        }
        Ok(self.a0(r))
    }
}

/// The two printed closed forms for `a0(0)`, kept for reporting:
/// `(1/2) sqrt(E1^2 / pi)` and `(1/2) E1 / pi`.
pub fn stated_a0_forms(well: &RadialWell) -> (f64, f64) {
    let e1sq = 1.0 + 2.0 * well.curvature();
    (0.5 * (e1sq / PI).sqrt(), 0.5 * e1sq.sqrt() / PI)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WkbPoint {
    pub h: f64,
    /// `max_{r <= R} |e^{d/h} u_h - h^{-1/2} a0|`.
    pub max_error: f64,
    /// `sqrt(h) u_h(0) / a0(0)`.
    pub origin_ratio: f64,
    /// Whether `e^{d/h} u_h` and `a0` were positive on every node.
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WkbReport {
    pub points: Vec<WkbPoint>,
    pub fit: PowerFit,
}

/// Maximum WKB error on `[0, radius]` for one ground state.
pub fn wkb_error_at(
    solution: &RadialEigenSolution,
    profile: &AgmonProfile,
    amplitude: &WkbAmplitude,
    radius: f64,
) -> WkbPoint {
    let h = solution.h;
    let mut max_error: f64 = 0.0;
    let mut positive = true;
    for (i, &u) in solution.u.iter().enumerate() {
        let r = solution.node(i);
        if r > radius {
            break;
        }
        let scaled = (profile.d(r) / h + u.ln()).exp();
        let pred = amplitude.a0(r) / h.sqrt();
        positive &= scaled > 0.0 && pred > 0.0;
        max_error = max_error.max((scaled - pred).abs());
    }
    WkbPoint {
        h,
        max_error,
        origin_ratio: h.sqrt() * solution.u_at(0.0) / amplitude.a0_at_origin(),
        positive,
    }
}

/// WKB error over an `h`-sweep with a power-law fit of the error.
pub fn wkb_profile_error(config: &DoubleWellConfig, h_list: &[f64], radius: f64) -> Result<WkbReport> {
    if h_list.len() < 2 {
        return Err(Error::argument("insufficient points for the WKB error fit"));
    }
    let profile = AgmonProfile::new(config.clone())?;
    let amplitude = WkbAmplitude::new(config.well(), radius.max(config.well().a()))?;
    let points = h_list
        .par_iter()
        .map(|&h| {
            let s = ground_state_for(config.well(), h, config.l())?;
            Ok(wkb_error_at(&s, &profile, &amplitude, radius))
        })
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = points.iter().map(|p| p.h).collect();
    let es: Vec<f64> = points.iter().map(|p| p.max_error).collect();
    let fit = loglog_fit(&hs, &es)?;
    Ok(WkbReport { points, fit })
}

/// `u(rho) = C_h e^{-rho^2/4h} J(rho)`, `J(rho) = int_0^inf e^{-rho^2 t/2h} t^{alpha-1} (1+t)^{-alpha} dt`,
/// valid for `rho >= a`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OuterRepresentation {
    pub h: f64,
    pub alpha: f64,
    pub ln_c: f64,
    pub a: f64,
    /// Largest relative mismatch against the grid eigenfunction on `[a, L+1]`.
    pub max_rel_error: f64,
}

const WINDOW_DROP: f64 = 50.0;

fn outer_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-15, 1e-12)
}

/// `ln int_0^inf exp(-s t) t^{alpha-1} (1+t)^{-alpha} dt` for `s > 0`, `alpha > 0`.
pub fn ln_outer_integral(s: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("outer representation needs alpha > 0, got {alpha}")));
    }
    if alpha >= 1.0 {
        let r = integrate_log(
            |t: f64| -s * t + (alpha - 1.0) * t.ln() - alpha * t.ln_1p(),
            0.0,
            f64::INFINITY,
            WINDOW_DROP,
            &outer_spec(),
        )?;
        Ok(r.ln_value)
    } else {
        // t = v^{1/alpha} removes the t^{alpha-1} singularity.
        let inv = 1.0 / alpha;
        let r = integrate_log(
            |v: f64| {
                let t = v.powf(inv);
                -s * t - alpha * t.ln_1p()
            },
            0.0,
            f64::INFINITY,
            WINDOW_DROP,
            &outer_spec(),
        )?;
        Ok(r.ln_value - alpha.ln())
    }
}

impl OuterRepresentation {
    pub fn ln_u(&self, rho: f64) -> Result<f64> {
        let s = rho * rho / (2.0 * self.h);
        Ok(self.ln_c - rho * rho / (4.0 * self.h) + ln_outer_integral(s, self.alpha)?)
    }

    /// `alpha = 1/2 - e_sw / (2h)`.
    pub fn alpha_for(e_sw: f64, h: f64) -> f64 {
        0.5 - e_sw / (2.0 * h)
    }
}

/// Fits `C_h` at `rho = a` and checks the representation on `[a, L+1]`.
pub fn calibrate_outer(config: &DoubleWellConfig, solution: &RadialEigenSolution) -> Result<OuterRepresentation> {
    let h = solution.h;
    let a = config.well().a();
    let alpha = OuterRepresentation::alpha_for(solution.ground_energy(), h);
    let ln_j = ln_outer_integral(a * a / (2.0 * h), alpha)?;
    let ln_c = solution.ln_u_at(a) + a * a / (4.0 * h) - ln_j;
    let mut rep = OuterRepresentation {
        h,
        alpha,
        ln_c,
        a,
        max_rel_error: 0.0,
    };
    let end = (config.l() + 1.0).min(solution.max_radius());
    let samples = 60;
    let mut worst: f64 = 0.0;
    for k in 0..=samples {
        let rho = a + (end - a) * k as f64 / samples as f64;
        let diff = rep.ln_u(rho)? - solution.ln_u_at(rho);
        worst = worst.max(diff.exp_m1().abs());
    }
    rep.max_rel_error = worst;
    if worst > 1e-2 {
        return Err(Error::Invariant(format!(
            "outer representation departs from the eigenfunction by {worst:e} on [a, L+1]"
        )));
    }
    Ok(rep)
}

/// Laplace data of the outer representation at `rho = a`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OuterConstants {
    /// `(sqrt(1 + 4 depth / a^2) - 1) / 2`.
    pub t_star: f64,
    pub eta: f64,
    /// `eta(a) - d(a)`.
    pub f: f64,
    pub m: f64,
}

pub fn outer_constants(profile: &AgmonProfile) -> OuterConstants {
    let well = profile.well();
    let (a, depth) = (well.a(), well.depth());
    let t_star = 0.5 * ((1.0 + 4.0 * depth / (a * a)).sqrt() - 1.0);
    let eta = 0.25 * (1.0 + 2.0 * t_star) * a * a + 0.5 * depth * (1.0 / t_star).ln_1p();
    let root = (a * a + 4.0 * depth).sqrt();
    let m = a0_origin(well.curvature()) * (2.0 * a * depth / PI).sqrt() * root.sqrt() / (root + a);
    OuterConstants {
        t_star,
        eta,
        f: eta - profile.d_mag(),
        m,
    }
}

/// `F` in the explicit form `(a/4) sqrt(a^2+4D) + (D/2) ln((sqrt(a^2+4D)+a)^2/(4D)) - d(a)`.
pub fn f_constant_explicit(profile: &AgmonProfile) -> f64 {
    let well = profile.well();
    let (a, depth) = (well.a(), well.depth());
    let root = (a * a + 4.0 * depth).sqrt();
    0.25 * a * root + 0.5 * depth * ((root + a).powi(2) / (4.0 * depth)).ln() - profile.d_mag()
}

/// `ln C_h^asy = ln m - ln h + F / h`.
pub fn ln_c_asymptotic(profile: &AgmonProfile, h: f64) -> f64 {
    let c = outer_constants(profile);
    c.m.ln() - h.ln() + c.f / h
}

/// Prefactor of `C_h` from a complete Laplace evaluation of the outer
/// representation at `rho = a`: relative to `m` it carries `a0(a)/a0(0)`
/// (the amplitude at the matching point), a factor `2^{-1/2}` (the Gaussian
/// width `sqrt(2 pi h / Phi'')` with `Phi'' = D(1+2t*)/(2 t*^2 (1+t*)^2)`),
/// and `(1 + 1/t*)^{-(E1-1)/2}` from the order-one part of `alpha`.
pub fn matched_prefactor(profile: &AgmonProfile, amplitude: &WkbAmplitude) -> f64 {
    let a = profile.well().a();
    let c = outer_constants(profile);
    let ln_ratio = amplitude.ln_a0(a) - amplitude.a0_at_origin().ln();
    let ln_alpha = -0.5 * (amplitude.e1() - 1.0) * (1.0 / c.t_star).ln_1p();
    c.m * (ln_ratio + ln_alpha).exp() / 2f64.sqrt()
}

/// `ln C_h^asy` built from [`matched_prefactor`].
pub fn ln_c_matched(profile: &AgmonProfile, amplitude: &WkbAmplitude, h: f64) -> f64 {
    matched_prefactor(profile, amplitude).ln() - h.ln() + outer_constants(profile).f / h
}
