//! The hopping coefficient between the two wells, computed from the radial
//! ground state by a direct angular quadrature and by the Bessel-kernel
//! representation, plus the WKB envelopes that bracket it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agmon::AgmonProfile;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_log, ln_bessel_i0, QuadratureSpec};
use crate::potential::DoubleWellConfig;
use crate::spectral::{ground_state_for, RadialEigenSolution};
use crate::wkb::{calibrate_outer, OuterRepresentation, WkbAmplitude};

const MAX_THETA_NODES: usize = 1 << 20;
const THETA_TOL: f64 = 1e-13;
const T_WINDOW: f64 = 50.0;
const PROFILE_SCAN: usize = 400;

fn r_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-15, 1e-11)
}

fn t_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-15, 1e-12)
}

/// Theta nodes used before doubling: `max(64, 40 ceil(L r / (2 pi h)))`.
pub fn theta_nodes(l: f64, r: f64, h: f64) -> usize {
    let periods = (l * r / (2.0 * PI * h)).ceil() as usize;
    (40 * periods).max(64)
}

fn check_solution(config: &DoubleWellConfig, h: f64, solution: &RadialEigenSolution) -> Result<()> {
    if (solution.h - h).abs() > 1e-14 * h {
        return Err(Error::argument(format!(
            "ground state was computed at h = {}, not {h}",
            solution.h
        )));
    }
    if solution.m != 0 {
        return Err(Error::argument("hopping needs the m = 0 ground state"));
    }
    let need = config.l() + config.well().a();
    if solution.max_radius() < need {
        return Err(Error::Precondition(format!(
            "ground state covers r <= {} but the hopping integral needs {need}",
            solution.max_radius()
        )));
    }
    Ok(())
}

/// `ln(r u(r) u(L - r))` maximised over `[0, a]`; all r-integrands are
/// divided by its exponential so that the quadrature works with O(1) values.
fn pair_shift(config: &DoubleWellConfig, solution: &RadialEigenSolution) -> f64 {
    let a = config.well().a();
    let l = config.l();
    (1..PROFILE_SCAN)
        .map(|i| {
            let r = a * i as f64 / PROFILE_SCAN as f64;
            r.ln() + solution.ln_u_at(r) + solution.ln_u_at(l - r)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `int_0^{2 pi} u(|x + z|) e^{i L r sin(theta) / 2h} dtheta / u(L - r)` on `n`
/// equispaced nodes, `sign` orienting the node set.
fn theta_sum(solution: &RadialEigenSolution, l: f64, r: f64, n: usize, sign: f64) -> (Complex64, f64) {
    let h = solution.h;
    let base = solution.ln_u_at(l - r);
    let k = l * r / (2.0 * h);
    let step = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for j in 0..n {
        let theta = sign * step * j as f64;
        let (s, c) = theta.sin_cos();
        let rho = (r * r + l * l + 2.0 * l * r * c).max(0.0).sqrt();
        let weight = (solution.ln_u_at(rho) - base).exp();
        acc += Complex64::from_polar(weight, k * s);
        mass += weight;
    }
    (acc * step, mass * step)
}

fn theta_integral(solution: &RadialEigenSolution, l: f64, r: f64, sign: f64) -> Result<Complex64> {
    let mut n = theta_nodes(l, r, solution.h);
    let (mut prev, _) = theta_sum(solution, l, r, n, sign);
    while n < MAX_THETA_NODES {
        n *= 2;
        let (next, mass) = theta_sum(solution, l, r, n, sign);
        if (next - prev).norm() <= THETA_TOL * mass {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        what: format!("angular quadrature at r = {r}"),
        estimate: prev.re,
        error_bound: prev.norm(),
    })
}

fn direct_impl(config: &DoubleWellConfig, h: f64, solution: &RadialEigenSolution, sign: f64) -> Result<Complex64> {
    check_solution(config, h, solution)?;
    let well = config.well();
    let (a, l) = (well.a(), config.l());
    let shift = pair_shift(config, solution);
    let factor = |r: f64| r * well.value(r) * (solution.ln_u_at(r) + solution.ln_u_at(l - r) - shift).exp();
    let inner = |r: f64| theta_integral(solution, l, r, sign).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let re = integrate(|r| factor(r) * inner(r).re, 0.0, a, &r_spec())?;
    let im = integrate(|r| factor(r) * inner(r).im, 0.0, a, &r_spec())?;
    Ok(Complex64::new(re.value, im.value) * shift.exp())
}

/// `w = int_0^a r v0(r) u(r) int_0^{2 pi} u(|x + z|) e^{i L r sin(theta) / 2h} dtheta dr`
/// with `u` taken from the eigenvector grid.
pub fn hopping_direct(config: &DoubleWellConfig, h: f64, solution: &RadialEigenSolution) -> Result<Complex64> {
    direct_impl(config, h, solution, 1.0)
}

/// [`hopping_direct`] on the mirrored node set `theta -> -theta`.
pub fn hopping_direct_reversed(config: &DoubleWellConfig, h: f64, solution: &RadialEigenSolution) -> Result<Complex64> {
    direct_impl(config, h, solution, -1.0)
}

/// `ln int_0^inf e^{-s t} t^{alpha-1} (1+t)^{-alpha} I0(k sqrt(t(t+1))) dt`.
pub fn ln_bessel_kernel(s: f64, k: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("kernel needs alpha > 0, got {alpha}")));
    }
    let ln_i0 = |t: f64| ln_bessel_i0(k * (t * (t + 1.0)).sqrt()).unwrap_or(f64::NAN);
    if alpha >= 1.0 {
        let r = integrate_log(
            |t: f64| -s * t + (alpha - 1.0) * t.ln() - alpha * t.ln_1p() + ln_i0(t),
            0.0,
            f64::INFINITY,
            T_WINDOW,
            &t_spec(),
        )?;
        Ok(r.ln_value)
    } else {
        let inv = 1.0 / alpha;
        let r = integrate_log(
            |v: f64| {
                let t = v.powf(inv);
                -s * t - alpha * t.ln_1p() + ln_i0(t)
            },
            0.0,
            f64::INFINITY,
            T_WINDOW,
            &t_spec(),
        )?;
        Ok(r.ln_value - alpha.ln())
    }
}

/// The same coefficient with the angular integral done in closed form via
/// the outer representation: `2 pi C e^{-(r^2+L^2)/4h} int G dt`.
pub fn hopping_bessel(
    config: &DoubleWellConfig,
    h: f64,
    outer: &OuterRepresentation,
    solution: &RadialEigenSolution,
) -> Result<f64> {
    check_solution(config, h, solution)?;
    if (outer.h - h).abs() > 1e-14 * h {
        return Err(Error::argument("outer representation calibrated at a different h"));
    }
    let well = config.well();
    let (a, l) = (well.a(), config.l());
    let shift = pair_shift(config, solution);
    let integrand = |r: f64| {
        let s = (r * r + l * l) / (2.0 * h);
        let k = l * r / h;
        match ln_bessel_kernel(s, k, outer.alpha) {
            Ok(ln_t) => {
                let ln = outer.ln_c - (r * r + l * l) / (4.0 * h) + ln_t + solution.ln_u_at(r) - shift;
                r * well.value(r) * ln.exp()
            }
            Err(_) => f64::NAN,
        }
    };
    let v = integrate(integrand, 0.0, a, &r_spec())?;
    Ok(2.0 * PI * v.value * shift.exp())
}

/// `int_0^a |v0(r)| u(rho(r)) u(r) r e^{-c r} dr` for a given radial map.
fn weighted_overlap<R, E>(config: &DoubleWellConfig, solution: &RadialEigenSolution, rho: R, expo: E) -> Result<f64>
where
    R: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let well = config.well();
    let a = well.a();
    let shift = pair_shift(config, solution);
    let v = integrate(
        |r| r * well.value(r).abs() * (solution.ln_u_at(r) + solution.ln_u_at(rho(r)) + expo(r) - shift).exp(),
        0.0,
        a,
        &r_spec(),
    )?;
    Ok(v.value * shift.exp())
}

/// `int_0^a |v0| u(L - r) u(r) r dr`; `|w|` is at most `2 pi` times this.
pub fn envelope_integral(config: &DoubleWellConfig, solution: &RadialEigenSolution) -> Result<f64> {
    let l = config.l();
    weighted_overlap(config, solution, |r| l - r, |_| 0.0)
}

/// `int_0^a e^{-(1-eps) L r / 2h} |v0| u(sqrt((L-r)^2 + 2 eps L r)) u(r) r dr`.
pub fn eps_lower_integral(config: &DoubleWellConfig, solution: &RadialEigenSolution, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let l = config.l();
    let h = solution.h;
    weighted_overlap(
        config,
        solution,
        |r| ((l - r) * (l - r) + 2.0 * eps * l * r).sqrt(),
        |r| -(1.0 - eps) * l * r / (2.0 * h),
    )
}

/// WKB leading terms `w^{0,+-}` and remainders `M_h^+-`, all as logarithms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WkbEnvelope {
    pub h: f64,
    pub ln_w0_plus: f64,
    pub ln_w0_minus: f64,
    pub ln_m_plus: f64,
    pub ln_m_minus: f64,
}

fn ln_envelope_term<P>(profile: &AgmonProfile, phase: P) -> Result<f64>
where
    P: Fn(f64) -> f64,
{
    let well = profile.well();
    let a = well.a();
    let log_f = |r: f64| {
        let v = well.value(r).abs();
        if v == 0.0 || r <= 0.0 {
            f64::NEG_INFINITY
        } else {
            r.ln() + v.ln() + phase(r)
        }
    };
    Ok(integrate_log(log_f, 0.0, a, T_WINDOW, &t_spec())?.ln_value)
}

/// The WKB terms of the hopping envelope at a single `h`.
pub fn hopping_wkb_envelope(profile: &AgmonProfile, amplitude: &WkbAmplitude, h: f64) -> Result<WkbEnvelope> {
    if !(h > 0.0) {
        return Err(Error::domain(format!("h must be positive, got {h}")));
    }
    let l = profile.l();
    let need = l + profile.well().a();
    if amplitude.r_max() < need {
        return Err(Error::Precondition(format!(
            "WKB amplitude tabulated to {} but {need} is needed",
            amplitude.r_max()
        )));
    }
    let d = |r: f64| profile.d(r);
    let ln_w0_plus = ln_envelope_term(profile, |r| {
        amplitude.ln_a0(l - r) + amplitude.ln_a0(r) - (d(r) + d(l - r)) / h
    })? - h.ln();
    let ln_w0_minus = ln_envelope_term(profile, |r| {
        amplitude.ln_a0(l + r) + amplitude.ln_a0(r) - (d(r) + d(l + r)) / h
    })? - h.ln();
    let ln_m_plus = ln_envelope_term(profile, |r| -(d(r) + d(l - r)) / h)?;
    let ln_m_minus = ln_envelope_term(profile, |r| -(d(r) + d(l + r)) / h)?;
    Ok(WkbEnvelope {
        h,
        ln_w0_plus,
        ln_w0_minus,
        ln_m_plus,
        ln_m_minus,
    })
}

/// `ln int_0^a |v0(r)| r dr`.
pub fn ln_potential_mass(profile: &AgmonProfile) -> Result<f64> {
    ln_envelope_term(profile, |_| 0.0)
}

/// Everything computed at one `h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoppingEstimate {
    pub h: f64,
    pub w_direct: Complex64,
    pub w_bessel: f64,
    /// `h ln |w|`, from the direct route.
    pub log_w: f64,
    /// `ln w^{0,+}`.
    pub wkb_upper: f64,
    /// `ln w^{0,-}`.
    pub wkb_lower: f64,
    pub ln_m_plus: f64,
    pub ln_m_minus: f64,
    /// `|w| / int |v0| u(L-r) u(r) r dr`.
    pub envelope_ratio: f64,
    /// `(eps, |w| / eps-integral)` for `eps` in {0.25, 0.5, 1}.
    pub eps_ratios: Vec<(f64, f64)>,
    pub outer_alpha: f64,
}

impl HoppingEstimate {
    pub fn imaginary_ratio(&self) -> f64 {
        self.w_direct.im.abs() / self.w_direct.norm()
    }

    pub fn route_gap(&self) -> f64 {
        (self.w_direct.re - self.w_bessel).abs() / self.w_direct.norm()
    }

    pub fn ln_abs(&self) -> f64 {
        self.w_direct.norm().ln()
    }
}

pub const EPS_FAMILY: [f64; 3] = [0.25, 0.5, 1.0];

/// Ground state, outer calibration, both routes and the envelopes at `h`.
pub fn hopping_estimate(config: &DoubleWellConfig, profile: &AgmonProfile, h: f64) -> Result<HoppingEstimate> {
    let solution = ground_state_for(config.well(), h, config.l())?;
    let outer = calibrate_outer(config, &solution)?;
    let amplitude = WkbAmplitude::new(config.well(), config.l() + config.well().a() + 1.0)?;
    estimate_with(config, profile, &amplitude, &solution, &outer)
}

pub fn estimate_with(
    config: &DoubleWellConfig,
    profile: &AgmonProfile,
    amplitude: &WkbAmplitude,
    solution: &RadialEigenSolution,
    outer: &OuterRepresentation,
) -> Result<HoppingEstimate> {
    let h = solution.h;
    let w_direct = hopping_direct(config, h, solution)?;
    let w_bessel = hopping_bessel(config, h, outer, solution)?;
    let env = hopping_wkb_envelope(profile, amplitude, h)?;
    let abs = w_direct.norm();
    let envelope_ratio = abs / envelope_integral(config, solution)?;
    let eps_ratios = EPS_FAMILY
        .iter()
        .map(|&eps| Ok((eps, abs / eps_lower_integral(config, solution, eps)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HoppingEstimate {
        h,
        w_direct,
        w_bessel,
        log_w: h * abs.ln(),
        wkb_upper: env.ln_w0_plus,
        wkb_lower: env.ln_w0_minus,
        ln_m_plus: env.ln_m_plus,
        ln_m_minus: env.ln_m_minus,
        envelope_ratio,
        eps_ratios,
        outer_alpha: outer.alpha,
    })
}

/// `ln C~` making `h/C~ e^{-S0/h} <= |w| <= C~/h e^{-Sa/h}` tight at one point.
pub fn fit_corridor_constant(h: f64, ln_w: f64, s0: f64, sa: f64) -> f64 {
    (h.ln() - s0 / h - ln_w).max(ln_w + h.ln() + sa / h)
}

/// `(lower, upper)` of the corridor for a frozen `ln C~`.
pub fn corridor_bounds(h: f64, ln_c: f64, s0: f64, sa: f64) -> (f64, f64) {
    (h.ln() - ln_c - s0 / h, ln_c - h.ln() - sa / h)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopePoint {
    pub h: f64,
    pub h_ln_w: f64,
    pub corridor_lower: f64,
    pub corridor_upper: f64,
    pub in_corridor: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeReport {
    pub s0: f64,
    pub sa: f64,
    pub shat: f64,
    pub sharp: Option<f64>,
    pub delta: f64,
    pub ln_c_tilde: f64,
    pub points: Vec<SlopePoint>,
    pub estimates: Vec<HoppingEstimate>,
    /// Every `h ln|w|` inside `[-S0 - delta, -Sa + delta]`.
    pub window_contained: bool,
    /// Every `h ln|w| >= -Shat - delta` (only meaningful for strictly negative wells).
    pub refined_contained: bool,
    /// `h ln|w|` decreases at every step as `h` decreases (diagnostic).
    pub monotone: bool,
    /// `|h ln|w| + S|` smaller at the smallest `h` than at the largest.
    pub trend_toward_sharp: Option<bool>,
    /// Least-squares intercept of `h ln|w|` against `h`.
    pub extrapolated: f64,
    /// `ln|w| + ln h + Sa/h - ln C~ <= 0` and the lower analogue at every point.
    pub frozen_corridor: bool,
    /// `|w| <= 2 pi int |v0| u u r dr` at every point.
    pub envelope_ok: bool,
    /// `min_h ratio_eps(h) / ratio_eps(h_max) >= 0.1` for every eps.
    pub eps_ok: bool,
}

impl SlopeReport {
    pub fn passed(&self) -> bool {
        self.window_contained
            && (self.refined_contained || self.sharp.is_none())
            && self.trend_toward_sharp.unwrap_or(true)
            && self.frozen_corridor
            && self.envelope_ok
            && self.eps_ok
    }
}

/// Runs [`hopping_estimate`] over `h_list` and checks the action windows.
pub fn hopping_slope_check(config: &DoubleWellConfig, h_list: &[f64]) -> Result<SlopeReport> {
    if h_list.len() < 5 {
        return Err(Error::argument(format!(
            "insufficient points: slope check needs at least 5 h values, got {}",
            h_list.len()
        )));
    }
    let profile = AgmonProfile::new(config.clone())?;
    let s0 = profile.action_s0()?.action.value;
    let sa = profile.action_sa()?.action.value;
    let shat = profile.action_shat()?.action.value;
    let delta = 0.15 * shat;
    let sharp = crate::asymptotics::sharp_action_for(&profile).ok().map(|r| r.s);
    let mut hs = h_list.to_vec();
    hs.sort_by(|x, y| y.total_cmp(x));
    let estimates = hs
        .par_iter()
        .map(|&h| hopping_estimate(config, &profile, h))
        .collect::<Result<Vec<_>>>()?;
    let ln_c_tilde = fit_corridor_constant(estimates[0].h, estimates[0].ln_abs(), s0, sa);
    let mut points = Vec::with_capacity(estimates.len());
    for e in &estimates {
        let (lo, hi) = corridor_bounds(e.h, ln_c_tilde, s0, sa);
        let ln_w = e.ln_abs();
        points.push(SlopePoint {
            h: e.h,
            h_ln_w: e.log_w,
            corridor_lower: lo,
            corridor_upper: hi,
            in_corridor: ln_w >= lo - 1e-9 && ln_w <= hi + 1e-9,
        });
    }
    let window_contained = points.iter().all(|p| p.h_ln_w >= -s0 - delta && p.h_ln_w <= -sa + delta);
    let refined_contained = points.iter().all(|p| p.h_ln_w >= -shat - delta);
    let monotone = points.windows(2).all(|w| w[1].h_ln_w < w[0].h_ln_w);
    let trend_toward_sharp = sharp.map(|s| {
        let first = points[0].h_ln_w + s;
        let last = points[points.len() - 1].h_ln_w + s;
        last.abs() < first.abs()
    });
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.h).sum::<f64>() / n;
    let my = points.iter().map(|p| p.h_ln_w).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.h - mx) * (p.h_ln_w - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.h - mx).powi(2)).sum();
    let extrapolated = my - sxy / sxx * mx;
    let envelope_ok = estimates.iter().all(|e| e.envelope_ratio <= 2.0 * PI);
    let eps_ok = EPS_FAMILY.iter().enumerate().all(|(k, _)| {
        let c = estimates[0].eps_ratios[k].1;
        estimates.iter().all(|e| e.eps_ratios[k].1 >= 0.1 * c)
    });
    Ok(SlopeReport {
        s0,
        sa,
        shat,
        sharp,
        delta,
        ln_c_tilde,
        frozen_corridor: points.iter().all(|p| p.in_corridor),
        points,
        estimates,
        window_contained,
        refined_contained,
        monotone,
        trend_toward_sharp,
        extrapolated,
        envelope_ok,
        eps_ok,
    })
}
