//! Phase surface `Psi(r, t)`, its minimiser, the sharp tunnelling action,
//! the chain of integrals `W1..W4` that reduces `|w|` to a Laplace integral
//! of `Psi`, and the weak-field rescaling of the action.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agmon::AgmonProfile;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_log, ln_bessel_i0, minimize_1d, QuadratureSpec};
use crate::potential::{DoubleWellConfig, RadialWell};
use crate::spectral::{ground_state_for, RadialEigenSolution};
use crate::wkb::{calibrate_outer, matched_prefactor, outer_constants, OuterRepresentation, WkbAmplitude};

const GRID: usize = 400;
const CHAIN_DROP: f64 = 40.0;

/// `Psi(r, t) = d(r) + (r^2 + L^2)(2t + 1)/4 + (D/2) ln(1 + 1/t) - L r sqrt(t(t+1))`.
#[derive(Debug, Clone)]
pub struct PsiSurface {
    profile: AgmonProfile,
}

impl PsiSurface {
    pub fn new(config: DoubleWellConfig) -> Result<Self> {
        Ok(Self::from_profile(AgmonProfile::new(config)?))
    }

    pub fn from_profile(profile: AgmonProfile) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &AgmonProfile {
        &self.profile
    }

    pub fn psi(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("Psi needs t > 0, got {t}")));
        }
        let a = self.profile.well().a();
        if !(0.0..=a).contains(&r) {
            return Err(Error::domain(format!("Psi needs 0 <= r <= a, got {r}")));
        }
        Ok(self.value(r, t))
    }

    fn value(&self, r: f64, t: f64) -> f64 {
        let l = self.profile.l();
        let depth = self.profile.well().depth();
        self.profile.d(r) + 0.25 * (r * r + l * l) * (2.0 * t + 1.0) + 0.5 * depth * (1.0 / t).ln_1p()
            - l * r * (t * (t + 1.0)).sqrt()
    }

    /// `d'(r) + r(2t+1)/2 - L sqrt(t(t+1))`.
    pub fn dr_psi(&self, r: f64, t: f64) -> f64 {
        self.profile.d_prime(r) + 0.5 * r * (2.0 * t + 1.0) - self.profile.l() * (t * (t + 1.0)).sqrt()
    }
}

/// Closed-form minimiser of `t -> Psi(a, t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClosedForm {
    pub t_a: f64,
    /// Larger root of `(L^2-a^2)^2 s^2 - (2(L^2+a^2)D + L^2 a^2) s + D^2`.
    pub s_plus: f64,
    pub s_minus: f64,
    /// Residual of `s_plus` in the quadratic, relative to its largest term.
    pub residual: f64,
    pub discriminant: f64,
    /// `(L^2 + a^2) s_plus - D`, positive for a genuine root of `dPsi/dt`.
    pub sign_condition: f64,
}

pub fn minimizer_closed_form(well: &RadialWell, l: f64) -> Result<ClosedForm> {
    let (a, depth) = (well.a(), well.depth());
    if !(l > 2.0 * a) {
        return Err(Error::domain(format!("closed-form minimiser needs L > 2a, got L = {l}, a = {a}")));
    }
    let (l2, a2) = (l * l, a * a);
    let qa = (l2 - a2).powi(2);
    let qb = 2.0 * (l2 + a2) * depth + l2 * a2;
    let qc = depth * depth;
    let discriminant = qb * qb - 4.0 * qa * qc;
    if !(discriminant >= 0.0) {
        return Err(Error::Invariant(format!("negative discriminant {discriminant}")));
    }
    let s_plus = (qb + discriminant.sqrt()) / (2.0 * qa);
    // Product of roots is c/a; avoids cancellation in the small root.
    let s_minus = qc / (qa * s_plus);
    let scale = (qa * s_plus * s_plus).max(qb * s_plus).max(qc);
    let residual = (qa * s_plus * s_plus - qb * s_plus + qc).abs() / scale;
    Ok(ClosedForm {
        t_a: (0.25 + s_plus).sqrt() - 0.5,
        s_plus,
        s_minus,
        residual,
        discriminant,
        sign_condition: (l2 + a2) * s_plus - depth,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PsiMinimum {
    pub r: f64,
    pub t: f64,
    pub value: f64,
    /// Best value seen on the raw grid before refinement.
    pub grid_value: f64,
}

/// Grid search of `Psi` on `[r_lo, r_hi] x [t_lo, t_hi]` (log-spaced `t`)
/// followed by coordinate descent.
pub fn psi_min_on(surface: &PsiSurface, r_lo: f64, r_hi: f64) -> Result<PsiMinimum> {
    let a = surface.profile.well().a();
    if !(0.0 <= r_lo && r_lo < r_hi && r_hi <= a) {
        return Err(Error::domain(format!("r-window [{r_lo}, {r_hi}] not inside [0, a]")));
    }
    let (mut t_lo, mut t_hi) = (1e-4_f64, 1e2_f64);
    for _ in 0..6 {
        let rs: Vec<f64> = (0..GRID).map(|i| r_lo + (r_hi - r_lo) * i as f64 / (GRID - 1) as f64).collect();
        let ln_span = (t_hi / t_lo).ln();
        let ts: Vec<f64> = (0..GRID)
            .map(|j| t_lo * (ln_span * j as f64 / (GRID - 1) as f64).exp())
            .collect();
        let (best, bi, bj) = rs
            .par_iter()
            .enumerate()
            .map(|(i, &r)| {
                ts.iter()
                    .enumerate()
                    .map(|(j, &t)| (surface.value(r, t), i, j))
                    .fold((f64::INFINITY, 0, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
            })
            .reduce(|| (f64::INFINITY, 0, 0), |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
        if bj == 0 {
            t_lo /= 100.0;
            continue;
        }
        if bj == GRID - 1 {
            t_hi *= 100.0;
            continue;
        }
        let dr = (r_hi - r_lo) / (GRID - 1) as f64;
        let (mut r, mut t, mut value) = (rs[bi], ts[bj], best);
        let mut t_window = (ts[bj - 1], ts[bj + 1]);
        for _ in 0..200 {
            let mr = minimize_1d(|x| surface.value(x, t), (r - 2.0 * dr).max(r_lo), (r + 2.0 * dr).min(r_hi), 1e-13)?;
            let mt = minimize_1d(|y| surface.value(mr.argmin, y), t_window.0, t_window.1, 1e-13)?;
            let improved = value - mt.value;
            r = mr.argmin;
            t = mt.argmin;
            t_window = (t * 0.98, t / 0.98);
            value = mt.value.min(value);
            if improved <= 1e-15 * value.abs() {
                break;
            }
        }
        return Ok(PsiMinimum {
            r,
            t,
            value,
            grid_value: best,
        });
    }
    Err(Error::Convergence("minimum of Psi keeps hitting the t-window boundary".into()))
}

pub fn psi_global_min(surface: &PsiSurface) -> Result<PsiMinimum> {
    psi_min_on(surface, 0.0, surface.profile.well().a())
}

/// `f(a, L, D)`: the `a`-independent part of `Psi(a, t_a) - d(a)`.
pub fn f_frak(a: f64, l: f64, depth: f64, t: f64) -> f64 {
    0.25 * (a * a + l * l) * (2.0 * t + 1.0) + 0.5 * depth * (1.0 / t).ln_1p() - l * a * (t * (t + 1.0)).sqrt()
}

/// `g(a, D) = (a/4) sqrt(a^2 + 4D) + (D/2) ln((sqrt(a^2 + 4D) + a)^2 / 4D)`.
pub fn g_frak(a: f64, depth: f64) -> f64 {
    let root = (a * a + 4.0 * depth).sqrt();
    0.25 * a * root + 0.5 * depth * ((root + a).powi(2) / (4.0 * depth)).ln()
}

/// `lim_{a -> 0} i(a, L, D) = (L/4) sqrt(L^2 + 4D) + D ln(L (1 + sqrt(1 + 4D/L^2)) / (2 sqrt D))`.
pub fn interaction_narrow_limit(l: f64, depth: f64) -> f64 {
    0.25 * l * (l * l + 4.0 * depth).sqrt() + depth * (l * (1.0 + (1.0 + 4.0 * depth / (l * l)).sqrt()) / (2.0 * depth.sqrt())).ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionReport {
    /// `-F + Psi(a, t_a)`.
    pub s: f64,
    /// `f - g + 2 d(a)`.
    pub s_explicit: f64,
    pub error_bound: f64,
    pub t_a: f64,
    pub s_plus: f64,
    /// `F`.
    pub f: f64,
    /// Magnetic Agmon distance `d(a)`.
    pub d_mag: f64,
    /// `S - 2 d(a)`.
    pub interaction: f64,
    pub f_frak: f64,
    pub g_frak: f64,
    pub sa: f64,
    pub shat: f64,
    pub s0: f64,
    /// `S < 2 Shat`.
    pub im_condition: bool,
}

pub fn sharp_action(well: &RadialWell, l: f64) -> Result<ActionReport> {
    let config = DoubleWellConfig::new(well.clone(), l)?;
    sharp_action_for(&AgmonProfile::new(config)?)
}

pub fn sharp_action_for(profile: &AgmonProfile) -> Result<ActionReport> {
    let well = profile.well();
    if !well.is_strictly_negative() {
        return Err(Error::Hypothesis("sharp action needs v0 < 0 on [0, a)".into()));
    }
    let (a, depth, l) = (well.a(), well.depth(), profile.l());
    let closed = minimizer_closed_form(well, l)?;
    let surface = PsiSurface::from_profile(profile.clone());
    let f = outer_constants(profile).f;
    let s = -f + surface.value(a, closed.t_a);
    let d_mag = profile.d_mag();
    let ff = f_frak(a, l, depth, closed.t_a);
    let gf = g_frak(a, depth);
    let s_explicit = ff - gf + 2.0 * d_mag;
    let error_bound = 4.0 * profile.d_error() + 1e-13 * s.abs();
    if (s - s_explicit).abs() > 1e-8 * s.abs().max(1.0) {
        return Err(Error::Invariant(format!("two assemblies of S disagree: {s} vs {s_explicit}")));
    }
    let sa = profile.action_sa()?.action.value;
    let shat = profile.action_shat()?.action.value;
    let s0 = profile.action_s0()?.action.value;
    let tol = error_bound + profile.d_error() * 4.0;
    if !(sa <= s + tol && s <= shat + tol && shat < s0) {
        return Err(Error::Invariant(format!(
            "action corridor violated: Sa = {sa}, S = {s}, Shat = {shat}, S0 = {s0}"
        )));
    }
    Ok(ActionReport {
        s,
        s_explicit,
        error_bound,
        t_a: closed.t_a,
        s_plus: closed.s_plus,
        f,
        d_mag,
        interaction: s - 2.0 * d_mag,
        f_frak: ff,
        g_frak: gf,
        sa,
        shat,
        s0,
        im_condition: s < 2.0 * shat,
    })
}

/// `g0(t) = t^{-5/4} (t+1)^{-1/4} (1 + 1/t)^{(E1 - 1)/2}`.
pub fn kernel_g0(t: f64, e1: f64) -> f64 {
    ln_kernel_g0(t, e1).exp()
}

fn ln_kernel_g0(t: f64, e1: f64) -> f64 {
    -1.25 * t.ln() - 0.25 * t.ln_1p() + 0.5 * (e1 - 1.0) * (1.0 / t).ln_1p()
}

/// Everything the `W` integrals need at one `h`.
#[derive(Debug, Clone)]
pub struct ChainContext {
    pub profile: AgmonProfile,
    pub amplitude: WkbAmplitude,
    pub solution: RadialEigenSolution,
    pub outer: OuterRepresentation,
    /// `ln C_h^asy` with the matched prefactor.
    pub ln_c_asy: f64,
    pub m: f64,
    pub f: f64,
}

impl ChainContext {
    pub fn new(config: &DoubleWellConfig, h: f64) -> Result<Self> {
        let profile = AgmonProfile::new(config.clone())?;
        let solution = ground_state_for(config.well(), h, config.l())?;
        let outer = calibrate_outer(config, &solution)?;
        let amplitude = WkbAmplitude::new(config.well(), config.well().a() + 1.0)?;
        Ok(Self::from_parts(profile, amplitude, solution, outer))
    }

    pub fn from_parts(
        profile: AgmonProfile,
        amplitude: WkbAmplitude,
        solution: RadialEigenSolution,
        outer: OuterRepresentation,
    ) -> Self {
        let m = matched_prefactor(&profile, &amplitude);
        let f = outer_constants(&profile).f;
        let h = solution.h;
        Self {
            ln_c_asy: m.ln() - h.ln() + f / h,
            profile,
            amplitude,
            solution,
            outer,
            m,
            f,
        }
    }

    pub fn h(&self) -> f64 {
        self.solution.h
    }
}

/// Logarithms of `W1..W4` and of the explicit `Psi`-form of `W4`. All carry
/// the `2 pi` of the angular integral so that `W1` approximates `|w|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WChain {
    pub h: f64,
    pub eta: f64,
    pub ln_w1: f64,
    pub ln_w2: f64,
    pub ln_w3: f64,
    pub ln_w4: f64,
    pub ln_w4_explicit: f64,
}

impl WChain {
    /// `W2 / (h^{1/2} W1)`.
    pub fn ratio21(&self) -> f64 {
        (self.ln_w2 - 0.5 * self.h.ln() - self.ln_w1).exp()
    }

    pub fn ratio32(&self) -> f64 {
        (self.ln_w3 - self.ln_w2).exp()
    }

    pub fn ratio43(&self) -> f64 {
        (self.ln_w4 - self.ln_w3).exp()
    }
}

#[derive(Clone, Copy)]
enum Kernel {
    /// `t^{alpha-1} (1+t)^{-alpha} I0(z)` with the numeric `alpha`.
    Exact,
    /// `I0(z) ~ e^z / sqrt(2 pi z)` with the numeric `alpha`.
    Asymptotic,
    /// As `Asymptotic` with `alpha = D/2h - (E1 - 1)/2`.
    Main,
}

fn chain_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-15, 1e-12)
}

/// `ln int_eta^inf G dt` for the chosen kernel.
fn ln_t_integral(ctx: &ChainContext, kernel: Kernel, r: f64, eta: f64) -> Result<f64> {
    let h = ctx.h();
    let l = ctx.profile.l();
    let depth = ctx.profile.well().depth();
    let e1 = ctx.amplitude.e1();
    let alpha = ctx.outer.alpha;
    let q = (r * r + l * l) / (2.0 * h);
    let k = l * r / h;
    let log_g = move |t: f64| {
        let z = k * (t * (t + 1.0)).sqrt();
        match kernel {
            Kernel::Exact => {
                -q * t + (alpha - 1.0) * t.ln() - alpha * t.ln_1p() + ln_bessel_i0(z).unwrap_or(f64::NAN)
            }
            Kernel::Asymptotic => {
                -q * t + z - 0.5 * (2.0 * PI * z).ln() + (alpha - 1.0) * t.ln() - alpha * t.ln_1p()
            }
            Kernel::Main => {
                -q * t + z + 0.5 * (h / (2.0 * PI * l * r)).ln() + ln_kernel_g0(t, e1)
                    - depth * (1.0 / t).ln_1p() / (2.0 * h)
            }
        }
    };
    Ok(integrate_log(log_g, eta, f64::INFINITY, CHAIN_DROP, &chain_spec())?.ln_value)
}

fn ln_r_integral<F: Fn(f64) -> Result<f64> + Sync>(ctx: &ChainContext, eta: f64, log_f: F) -> Result<f64> {
    let a = ctx.profile.well().a();
    let failure = std::sync::Mutex::new(None);
    let wrapped = |r: f64| match log_f(r) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    let value = integrate_log(wrapped, eta, a, CHAIN_DROP, &chain_spec())?.ln_value;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(value)
}

fn ln_abs_v0(ctx: &ChainContext, r: f64) -> f64 {
    ctx.profile.well().value(r).abs().ln()
}

/// `W1..W4` and the explicit form at one `eta`.
pub fn w_chain_at(ctx: &ChainContext, eta: f64) -> Result<WChain> {
    let a = ctx.profile.well().a();
    if !(eta > 0.0 && eta < a) {
        return Err(Error::domain(format!("eta must lie in (0, a), got {eta}")));
    }
    let h = ctx.h();
    let l = ctx.profile.l();
    let ln_2pi = (2.0 * PI).ln();
    let gauss = |r: f64| -(r * r + l * l) / (4.0 * h);
    let wkb = |r: f64| ctx.amplitude.ln_a0(r) - ctx.profile.d(r) / h;
    let jobs: Vec<u8> = (0..5).collect();
    let out = jobs
        .par_iter()
        .map(|&job| match job {
            0 => ln_r_integral(ctx, eta, |r| {
                Ok(r.ln() + ln_abs_v0(ctx, r) + ctx.solution.ln_u_at(r) + gauss(r) + ln_t_integral(ctx, Kernel::Exact, r, eta)?)
            })
            .map(|v| v + ln_2pi + ctx.outer.ln_c),
            1 => ln_r_integral(ctx, eta, |r| {
                Ok(r.ln() + ln_abs_v0(ctx, r) + wkb(r) + gauss(r) + ln_t_integral(ctx, Kernel::Exact, r, eta)?)
            })
            .map(|v| v + ln_2pi + ctx.ln_c_asy),
            2 => ln_r_integral(ctx, eta, |r| {
                Ok(r.ln() + ln_abs_v0(ctx, r) + wkb(r) + gauss(r) + ln_t_integral(ctx, Kernel::Asymptotic, r, eta)?)
            })
            .map(|v| v + ln_2pi + ctx.ln_c_asy),
            3 => ln_r_integral(ctx, eta, |r| {
                Ok(r.ln() + ln_abs_v0(ctx, r) + wkb(r) + gauss(r) + ln_t_integral(ctx, Kernel::Main, r, eta)?)
            })
            .map(|v| v + ln_2pi + ctx.ln_c_asy),
            _ => explicit_w4(ctx, eta),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WChain {
        h,
        eta,
        ln_w1: out[0],
        ln_w2: out[1],
        ln_w3: out[2],
        ln_w4: out[3],
        ln_w4_explicit: out[4],
    })
}

/// `W4 = m sqrt(2 pi / (h L)) int sqrt(r) |v0| a0 int g0(t) e^{-(Psi - F)/h} dt dr`.
fn explicit_w4(ctx: &ChainContext, eta: f64) -> Result<f64> {
    let h = ctx.h();
    let l = ctx.profile.l();
    let e1 = ctx.amplitude.e1();
    let surface = PsiSurface::from_profile(ctx.profile.clone());
    let inner = |r: f64| -> Result<f64> {
        let log_g = |t: f64| ln_kernel_g0(t, e1) - (surface.value(r, t) - ctx.f) / h;
        Ok(integrate_log(log_g, eta, f64::INFINITY, CHAIN_DROP, &chain_spec())?.ln_value)
    };
    let v = ln_r_integral(ctx, eta, |r| Ok(0.5 * r.ln() + ln_abs_v0(ctx, r) + ctx.amplitude.ln_a0(r) + inner(r)?))?;
    Ok(v + ctx.m.ln() + 0.5 * (2.0 * PI / (h * l)).ln())
}

pub fn w_chain(config: &DoubleWellConfig, h: f64, eta: f64) -> Result<WChain> {
    let a = config.well().a();
    if !(eta > 0.0 && eta < a) {
        return Err(Error::domain(format!("eta must lie in (0, a), got {eta}")));
    }
    w_chain_at(&ChainContext::new(config, h)?, eta)
}

/// `2 int_0^{L/2} sqrt(v0 - v_min)`, the action without magnetic field.
pub fn non_magnetic_action(well: &RadialWell, l: f64) -> Result<f64> {
    let (a, depth) = (well.a(), well.depth());
    if !(l > 2.0 * a) {
        return Err(Error::domain("non-magnetic action needs L > 2a"));
    }
    let inner = integrate(
        |r| (well.value(r) + depth).max(0.0).sqrt(),
        0.0,
        a,
        &QuadratureSpec::with_tolerances(1e-14, 1e-13),
    )?;
    Ok(2.0 * inner.value + (l - 2.0 * a) * depth.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaScaling {
    pub beta: f64,
    /// `beta S(beta^-2 v0, L)`.
    pub action: f64,
    pub sa: f64,
    pub shat: f64,
    pub limit: f64,
}

pub fn beta_scaling(well: &RadialWell, l: f64, beta: f64) -> Result<BetaScaling> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let scaled = if beta == 1.0 { well.clone() } else { well.scaled_depth(beta.powi(-2))? };
    let report = sharp_action(&scaled, l)?;
    Ok(BetaScaling {
        beta,
        action: beta * report.s,
        sa: beta * report.sa,
        shat: beta * report.shat,
        limit: non_magnetic_action(well, l)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn canonical_surface() -> PsiSurface {
        PsiSurface::new(DoubleWellConfig::canonical()).unwrap()
    }

    #[test]
    fn canonical_root_is_one_fifth() {
        // Quadratic 225 s^2 - 50 s + 1 = 0 has roots 1/5 and 1/45.
        let c = minimizer_closed_form(&RadialWell::bump(1.0, 1.0).unwrap(), 4.0).unwrap();
        assert_relative_eq!(c.s_plus, 0.2, epsilon = 1e-15);
        assert_relative_eq!(c.s_minus, 1.0 / 45.0, epsilon = 1e-15);
        assert_relative_eq!(c.t_a, 0.45f64.sqrt() - 0.5, epsilon = 1e-15);
        assert!(c.residual < 1e-14 && c.sign_condition > 0.0);
    }

    #[test]
    fn psi_rejects_non_positive_t() {
        let s = canonical_surface();
        assert!(matches!(s.psi(0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(s.psi(0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_minimises_psi_on_the_edge() {
        let s = canonical_surface();
        let c = minimizer_closed_form(s.profile().well(), 4.0).unwrap();
        let m = minimize_1d(|t| s.value(1.0, t), 1e-3, 5.0, 1e-12).unwrap();
        assert_relative_eq!(m.argmin, c.t_a, epsilon = 1e-7);
        assert_relative_eq!(m.value, s.value(1.0, c.t_a), max_relative = 1e-12);
    }

    #[test]
    fn origin_slice_matches_its_own_quadratic() {
        // At r = 0, dPsi/dt = 0 reduces to L^2 s = D with s = t(t+1).
        let s = canonical_surface();
        let t0 = (0.25 + 1.0 / 16.0f64).sqrt() - 0.5;
        let m = minimize_1d(|t| s.value(0.0, t), 1e-3, 5.0, 1e-12).unwrap();
        assert_relative_eq!(m.argmin, t0, epsilon = 1e-8);
    }

    #[test]
    fn grid_search_lands_on_closed_form() {
        let s = canonical_surface();
        let c = minimizer_closed_form(s.profile().well(), 4.0).unwrap();
        let m = psi_global_min(&s).unwrap();
        // Psi is flat in r to ~1e-12 just inside a, so only the value is sharp.
        assert!(m.r > 0.95, "minimiser drifted to r = {}", m.r);
        assert_relative_eq!(m.value, s.value(1.0, c.t_a), max_relative = 1e-9);
        let interior = psi_min_on(&s, 0.0, 0.9).unwrap();
        assert!(interior.value > m.value);
    }

    #[test]
    fn r_derivative_negative_at_origin() {
        let s = canonical_surface();
        for &t in &[0.01, 0.1, 1.0, 10.0] {
            let want = -4.0 * (t * (t + 1.0f64)).sqrt();
            assert_relative_eq!(s.dr_psi(0.0, t), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn g_frak_equals_outer_eta() {
        let p = AgmonProfile::new(DoubleWellConfig::canonical()).unwrap();
        let c = outer_constants(&p);
        assert_relative_eq!(g_frak(1.0, 1.0), c.eta, epsilon = 1e-13);
    }

    #[test]
    fn narrow_limit_equals_free_agmon_distance() {
        // int_0^L sqrt(rho^2/4 + D) by midpoint sums.
        let (l, depth) = (4.0, 1.0);
        let n = 200_000;
        let dx = l / n as f64;
        let sum: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * dx;
                (0.25 * x * x + depth).sqrt()
            })
            .sum::<f64>()
            * dx;
        assert_relative_eq!(interaction_narrow_limit(l, depth), sum, epsilon = 1e-8);
    }

    #[test]
    fn kernel_g0_reduces_for_unit_e1() {
        for &t in &[0.1f64, 1.0, 7.0] {
            let want = t.powf(-1.25) * (1.0 + t).powf(-0.25);
            assert_relative_eq!(kernel_g0(t, 1.0), want, max_relative = 1e-14);
        }
    }

    #[test]
    fn beta_one_is_identity() {
        let w = RadialWell::bump(1.0, 1.0).unwrap();
        let b = beta_scaling(&w, 4.0, 1.0).unwrap();
        let s = sharp_action(&w, 4.0).unwrap();
        assert_eq!(b.action, s.s);
    }

    #[test]
    fn chain_rejects_eta_outside_support() {
        let cfg = DoubleWellConfig::canonical();
        assert!(matches!(w_chain(&cfg, 0.3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(w_chain(&cfg, 0.3, 0.0), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quadratic_root_valid_for_separated_wells(a in 0.2f64..3.0, gap in 0.05f64..5.0, depth in 0.1f64..20.0) {
            let l = 2.0 * a + gap;
            let c = minimizer_closed_form(&RadialWell::bump(depth, a).unwrap(), l).unwrap();
            prop_assert!(c.discriminant > 0.0);
            prop_assert!(c.residual <= 1e-10);
            prop_assert!(c.sign_condition > 0.0);
            prop_assert!(c.s_plus > c.s_minus && c.s_minus > 0.0);
        }

        #[test]
        fn psi_bounded_below(r in 0.0f64..1.0, lt in -6.0f64..4.0) {
            let s = canonical_surface();
            let t = lt.exp();
            let v = s.psi(r, t).unwrap();
            // (2t+1)(L-r)^2/4 <= the quadratic part, d >= 0.
            prop_assert!(v >= 0.5 * (1.0 / t).ln_1p() + 9.0 / 4.0 - 1e-12);
            prop_assert!(v >= 4.0 * t + 2.0 - 1e-12);
        }
    }
}
