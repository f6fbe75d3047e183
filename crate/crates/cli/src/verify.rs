//! The invariant battery behind `magtun verify`.

use magtun_core::agmon::AgmonProfile;
use magtun_core::asymptotics::{minimizer_closed_form, psi_global_min, sharp_action_for, PsiSurface};
use magtun_core::hopping::hopping_estimate;
use magtun_core::potential::{DoubleWellConfig, RadialWell};
use magtun_core::spectral::{default_grid, harmonic_expansion_check, solve_fiber, FiberPotential, FiberProblem};
use magtun_core::splitting2d::{gap_vs_hopping, landau_level, LatticeParams};
use magtun_core::wkb::wkb_profile_error;
use magtun_core::Result;

use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    SkippedFloor,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::SkippedFloor => "skipped(floor)",
        }
    }
}

pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

pub struct Options {
    pub quick: bool,
    /// Lattice spacing for the discrete Landau check.
    pub grid: Option<f64>,
}

fn judged(pass: bool, detail: String) -> Result<(Status, String)> {
    Ok((if pass { Status::Pass } else { Status::Fail }, detail))
}

fn fiber_lowest(m: i32, potential: FiberPotential) -> Result<f64> {
    let radius = 12.0;
    let p = FiberProblem { m, h: 1.0, radius, n: default_grid(1.0, radius), potential };
    Ok(solve_fiber(&p, 1)?.energies[0])
}

fn landau(grid: Option<f64>) -> Result<(Status, String)> {
    let fiber = fiber_lowest(0, FiberPotential::Free)?;
    let delta = grid.unwrap_or(0.1);
    let rep = landau_level(0.5, &LatticeParams { delta, half_x: 4.0, half_y: 4.0 })?;
    judged(
        (fiber - 1.0).abs() <= 1e-6 && rep.rel_error <= 0.03,
        format!("fiber {fiber:.10}, lattice extrapolated {:.8} at h = 0.5", rep.extrapolated),
    )
}

fn oscillator() -> Result<(Status, String)> {
    let mut worst: f64 = 0.0;
    for &mu in &[0.5, 1.0, 2.0] {
        let got = fiber_lowest(0, FiberPotential::Harmonic { mu })?;
        worst = worst.max((got - (1.0f64 + 4.0 * mu).sqrt()).abs());
    }
    judged(worst <= 1e-6, format!("max deviation from sqrt(1+4mu): {worst:.2e}"))
}

fn harmonic(config: &DoubleWellConfig) -> Result<(Status, String)> {
    let rep = harmonic_expansion_check(config.well(), &[0.2, 0.14, 0.1, 0.07, 0.05], config.l())?;
    let p = rep.fit.map(|f| f.exponent).unwrap_or(f64::NAN);
    judged((1.4..=2.1).contains(&p), format!("exponent {p:.4}"))
}

fn wkb(config: &DoubleWellConfig) -> Result<(Status, String)> {
    let rep = wkb_profile_error(config, &[0.2, 0.14, 0.1, 0.07, 0.05], config.well().a())?;
    let positive = rep.points.iter().all(|p| p.positive);
    judged((0.4..=1.1).contains(&rep.fit.exponent) && positive, format!("exponent {:.4}, positive {positive}", rep.fit.exponent))
}

fn hopping(config: &DoubleWellConfig, hs: &[f64]) -> Result<[(Status, String); 2]> {
    let profile = AgmonProfile::new(config.clone())?;
    let mut imag: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for &h in hs {
        let e = hopping_estimate(config, &profile, h)?;
        imag = imag.max(e.imaginary_ratio());
        gap = gap.max(e.route_gap());
    }
    Ok([
        judged(imag <= 1e-8, format!("max |Im w|/|w| = {imag:.2e}"))?,
        judged(gap <= 1e-5, format!("max route gap = {gap:.2e}"))?,
    ])
}

fn psi(config: &DoubleWellConfig) -> Result<(Status, String)> {
    let surface = PsiSurface::new(config.clone())?;
    let closed = minimizer_closed_form(config.well(), config.l())?;
    let want = surface.psi(config.well().a(), closed.t_a)?;
    let got = psi_global_min(&surface)?.value;
    let rel = (got - want).abs() / want.abs();
    judged(rel <= 1e-6 && closed.residual <= 1e-10, format!("relative gap {rel:.2e}, root residual {:.1e}", closed.residual))
}

fn corridor(config: &DoubleWellConfig) -> Result<(Status, String)> {
    let profile = AgmonProfile::new(config.clone())?;
    let r = sharp_action_for(&profile)?;
    let la2 = config.l() * config.well().a() / 2.0;
    let ok = r.sa < r.shat && r.shat < r.s0.min(r.sa + la2) && r.sa <= r.s && r.s <= r.shat && r.s < 2.0 * r.shat;
    judged(ok, format!("Sa {:.6} <= S {:.6} <= Shat {:.6} < S0 {:.6}", r.sa, r.s, r.shat, r.s0))
}

fn splitting() -> Result<(Status, String)> {
    let config = DoubleWellConfig::new(RadialWell::bump(1.0, 1.0)?, 8.5)?;
    let rep = gap_vs_hopping(&config, &[1.4, 1.2, 1.0])?;
    if rep.points.iter().all(|p| !p.resolvable) {
        return Ok((Status::SkippedFloor, "no gap above the solver floor".into()));
    }
    judged(rep.passed(), format!("corridor ok {}, ratios ok {:?}", rep.corridor_ok, rep.ratio_ok))
}

fn splitting_floor() -> Result<(Status, String)> {
    let config = DoubleWellConfig::new(RadialWell::bump(1.0, 1.0)?, 8.5)?;
    let rep = gap_vs_hopping(&config, &[0.5])?;
    let p = &rep.points[0];
    if !p.resolvable {
        return Ok((Status::SkippedFloor, format!("predicted gap {:.1e} below 100 x floor {:.1e}", p.predicted_gap, p.floor)));
    }
    judged(rep.passed(), format!("gap {:.3e} resolved", p.gap))
}

pub fn run(config: &DoubleWellConfig, opts: &Options) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut record = |name: &'static str, r: Result<(Status, String)>| {
        let (status, detail) = r.unwrap_or_else(|e| (Status::Fail, e.to_string()));
        checks.push(Check { name, status, detail });
    };
    record("landau_level", landau(opts.grid));
    record("oscillator", oscillator());
    record("psi_closed_form", psi(config));
    record("action_corridor", corridor(config));
    let hs: &[f64] = if opts.quick { &[0.5] } else { &[0.5, 0.3] };
    match hopping(config, hs) {
        Ok([reality, routes]) => {
            record("hopping_reality", Ok(reality));
            record("route_agreement", Ok(routes));
        }
        Err(e) => {
            record("hopping_reality", Err(e.clone()));
            record("route_agreement", Err(e));
        }
    }
    if !opts.quick {
        record("harmonic_exponent", harmonic(config));
        record("wkb_exponent", wkb(config));
        record("splitting_corridor", splitting());
        record("splitting_floor", splitting_floor());
    }
    checks
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "status", "detail"]);
    for c in checks {
        t.push(vec![c.name.into(), c.status.label().into(), c.detail.clone().into()]);
    }
    t
}
