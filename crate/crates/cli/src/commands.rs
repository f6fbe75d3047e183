//! Subcommand bodies. Each returns a table; errors carry their exit class.

use magtun_core::agmon::{AgmonProfile, MIN_TOL};
use magtun_core::asymptotics::{beta_scaling, minimizer_closed_form, sharp_action_for, w_chain_at, ChainContext};
use magtun_core::hopping::{hopping_bessel, hopping_direct, hopping_estimate};
use magtun_core::potential::DoubleWellConfig;
use magtun_core::spectral::{default_grid, default_radius, ground_state_for, solve_fiber, FiberPotential, FiberProblem};
use magtun_core::splitting2d::{gap_vs_hopping_with, LatticeParams, SolverOptions};
use magtun_core::wkb::{calibrate_outer, ln_c_asymptotic, ln_c_matched, wkb_error_at, WkbAmplitude};
use magtun_core::Error;
use rayon::prelude::*;

use crate::table::{Cell, Table};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Argument(_) | Error::Hypothesis(_) | Error::Precondition(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub fn constants(config: &DoubleWellConfig) -> Outcome<Table> {
    let profile = AgmonProfile::new(config.clone())?;
    let s0 = profile.action_s0()?.action;
    let sa = profile.action_sa()?.action;
    let shat = profile.action_shat()?;
    let ra = profile.remainder_ra()?;
    let corridor = profile.corridor_cl();
    let sharp = sharp_action_for(&profile)?;
    let closed = minimizer_closed_form(config.well(), config.l())?;
    let mut t = Table::new(&["quantity", "value", "error_bound"]);
    let rows: [(&str, f64, f64); 10] = [
        ("S0", s0.value, s0.error_bound),
        ("Sa", sa.value, sa.error_bound),
        ("Shat", shat.action.value, shat.action.error_bound),
        ("r0", shat.r0, MIN_TOL),
        ("Ra", ra.value, (ra.value - ra.direct).abs()),
        ("C_L", corridor.c_l, 0.0),
        ("S", sharp.s, sharp.error_bound),
        ("t_a", sharp.t_a, closed.residual),
        ("D_mag", sharp.d_mag, profile.d_error()),
        ("interaction", sharp.interaction, sharp.error_bound),
    ];
    for (name, value, err) in rows {
        t.push(vec![name.into(), value.into(), err.into()]);
    }
    let ordered = sa.value < shat.action.value && shat.action.value < s0.value;
    t.push(vec!["Sa<Shat<S0".into(), ordered.into(), Cell::Empty]);
    Ok(t)
}

pub fn spectrum(config: &DoubleWellConfig, hs: &[f64]) -> Outcome<Table> {
    let well = config.well();
    let jobs: Vec<(f64, i32)> = hs.iter().flat_map(|&h| (-2..=2).map(move |m| (h, m))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(h, m)| {
            let radius = default_radius(h, well.a(), config.l());
            let p = FiberProblem { m, h, radius, n: default_grid(h, radius), potential: FiberPotential::Well(well.clone()) };
            let s = solve_fiber(&p, 2)?;
            let harmonic = (m == 0).then(|| well.v_min() + h * well.e1());
            Ok(vec![h.into(), (m as i64).into(), s.energies[0].into(), s.energies[1].into(), s.energy_error.into(), harmonic.into()])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&["h", "m", "e1", "e2", "energy_error", "harmonic"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn wkb(config: &DoubleWellConfig, hs: &[f64]) -> Outcome<Table> {
    let profile = AgmonProfile::new(config.clone())?;
    let a = config.well().a();
    let amplitude = WkbAmplitude::new(config.well(), a + 1.0)?;
    let rows = hs
        .par_iter()
        .map(|&h| {
            let s = ground_state_for(config.well(), h, config.l())?;
            let point = wkb_error_at(&s, &profile, &amplitude, a);
            let outer = calibrate_outer(config, &s)?;
            Ok(vec![
                h.into(),
                s.ground_energy().into(),
                point.max_error.into(),
                point.origin_ratio.into(),
                point.positive.into(),
                outer.alpha.into(),
                outer.ln_c.into(),
                ln_c_asymptotic(&profile, h).into(),
                ln_c_matched(&profile, &amplitude, h).into(),
                outer.max_rel_error.into(),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&[
        "h",
        "e_sw",
        "wkb_max_error",
        "origin_ratio",
        "positive",
        "alpha",
        "ln_c",
        "ln_c_asymptotic",
        "ln_c_matched",
        "outer_rel_error",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Route {
    Direct,
    Bessel,
    Both,
}

pub fn hopping(config: &DoubleWellConfig, hs: &[f64], route: Route) -> Outcome<Table> {
    let rows = hs
        .par_iter()
        .map(|&h| {
            let s = ground_state_for(config.well(), h, config.l())?;
            let direct = if route != Route::Bessel { Some(hopping_direct(config, h, &s)?) } else { None };
            let bessel = if route != Route::Direct {
                let outer = calibrate_outer(config, &s)?;
                Some(hopping_bessel(config, h, &outer, &s)?)
            } else {
                None
            };
            let abs = direct.map(|w| w.norm()).or(bessel.map(f64::abs)).unwrap_or(f64::NAN);
            let gap = match (direct, bessel) {
                (Some(w), Some(b)) => Some((w.re - b).abs() / w.norm()),
                _ => None,
            };
            Ok(vec![
                h.into(),
                direct.map(|w| w.re).into(),
                direct.map(|w| w.im).into(),
                bessel.into(),
                (h * abs.ln()).into(),
                direct.map(|w| w.im.abs() / w.norm()).into(),
                gap.into(),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&["h", "re_w_direct", "im_w_direct", "w_bessel", "h_ln_w", "imag_ratio", "route_gap"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn action_report(config: &DoubleWellConfig) -> Outcome<Table> {
    let profile = AgmonProfile::new(config.clone())?;
    let r = sharp_action_for(&profile)?;
    let mut t = Table::new(&["quantity", "value"]);
    let rows: [(&str, Cell); 14] = [
        ("S", r.s.into()),
        ("S_explicit", r.s_explicit.into()),
        ("error_bound", r.error_bound.into()),
        ("t_a", r.t_a.into()),
        ("s_plus", r.s_plus.into()),
        ("F", r.f.into()),
        ("D_mag", r.d_mag.into()),
        ("interaction", r.interaction.into()),
        ("f_frak", r.f_frak.into()),
        ("g_frak", r.g_frak.into()),
        ("Sa", r.sa.into()),
        ("Shat", r.shat.into()),
        ("S0", r.s0.into()),
        ("im_condition", r.im_condition.into()),
    ];
    for (name, v) in rows {
        t.push(vec![name.into(), v]);
    }
    Ok(t)
}

pub fn wchain(config: &DoubleWellConfig, hs: &[f64], etas: &[f64]) -> Outcome<Table> {
    let a = config.well().a();
    if let Some(&bad) = etas.iter().find(|&&e| !(e > 0.0 && e < a)) {
        return Err(Failure::config(format!("eta must lie in (0, a), got {bad}")));
    }
    let mut t = Table::new(&["h", "eta", "ln_w1", "ln_w2", "ln_w3", "ln_w4", "ln_w4_explicit", "ratio21", "ratio32", "ratio43"]);
    for &h in hs {
        let ctx = ChainContext::new(config, h)?;
        for &eta in etas {
            let c = w_chain_at(&ctx, eta)?;
            t.push(vec![
                h.into(),
                eta.into(),
                c.ln_w1.into(),
                c.ln_w2.into(),
                c.ln_w3.into(),
                c.ln_w4.into(),
                c.ln_w4_explicit.into(),
                c.ratio21().into(),
                c.ratio32().into(),
                c.ratio43().into(),
            ]);
        }
    }
    Ok(t)
}

pub fn beta_sweep(config: &DoubleWellConfig, betas: &[f64]) -> Outcome<Table> {
    let rows = betas
        .par_iter()
        .map(|&b| beta_scaling(config.well(), config.l(), b))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&["beta", "beta_S", "beta_Sa", "beta_Shat", "limit"]);
    for r in rows {
        t.push(vec![r.beta.into(), r.action.into(), r.sa.into(), r.shat.into(), r.limit.into()]);
    }
    Ok(t)
}

/// Lattice parameters: the automatic choice with optional overrides.
pub fn lattice_params(config: &DoubleWellConfig, h: f64, grid: Option<f64>, box_half: Option<[f64; 2]>) -> LatticeParams {
    let mut p = LatticeParams::auto(config, h);
    if let Some(d) = grid {
        p.delta = d;
    }
    if let Some([x, y]) = box_half {
        p.half_x = x;
        p.half_y = y;
    }
    p
}

fn floor_flag(resolvable: bool) -> &'static str {
    if resolvable {
        "resolved"
    } else {
        "unresolvable"
    }
}

/// Lattice overrides shared by `splitting` and `sweep`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LatticeFlags {
    pub grid: Option<f64>,
    pub box_half: Option<[f64; 2]>,
    pub tol: Option<f64>,
}

impl LatticeFlags {
    fn solver(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o
    }
}

pub fn splitting(config: &DoubleWellConfig, hs: &[f64], flags: LatticeFlags) -> Outcome<Table> {
    let report = gap_vs_hopping_with(config, hs, &|h| lattice_params(config, h, flags.grid, flags.box_half), &flags.solver())?;
    let mut t = Table::new(&["h", "e1", "e2", "gap", "two_w", "ratio", "h_ln_gap", "floor_flag"]);
    for p in report.points {
        t.push(vec![
            p.h.into(),
            p.e1.into(),
            p.e2.into(),
            p.gap.into(),
            p.two_w.into(),
            p.ratio.into(),
            p.h_ln_gap.into(),
            floor_flag(p.resolvable).into(),
        ]);
    }
    Ok(t)
}

pub fn sweep(config: &DoubleWellConfig, hs: &[f64], with_splitting: bool, flags: LatticeFlags) -> Outcome<Table> {
    let profile = AgmonProfile::new(config.clone())?;
    let gate = (with_splitting && !config.fsw_condition()).then(|| format!("splitting skipped: separation condition L > 4(sqrt(depth) + a) fails at L = {}", config.l()));
    let rows: Vec<Vec<Cell>> = hs
        .par_iter()
        .map(|&h| {
            let mut notes = Vec::new();
            let mut row: Vec<Cell> = vec![h.into()];
            match hopping_estimate(config, &profile, h) {
                Ok(e) => row.extend([
                    e.log_w.into(),
                    e.w_direct.re.into(),
                    e.w_direct.im.into(),
                    e.route_gap().into(),
                    e.wkb_upper.into(),
                    e.wkb_lower.into(),
                    e.envelope_ratio.into(),
                ]),
                Err(err) => {
                    row.extend(std::iter::repeat_n(Cell::Empty, 7));
                    notes.push(format!("hopping: {err}"));
                }
            }
            if with_splitting && gate.is_none() {
                match gap_vs_hopping_with(config, &[h], &|h| lattice_params(config, h, flags.grid, flags.box_half), &flags.solver()) {
                    Ok(rep) => {
                        let p = &rep.points[0];
                        row.extend([p.gap.into(), p.ratio.into(), p.h_ln_gap.into(), floor_flag(p.resolvable).into()]);
                    }
                    Err(err) => {
                        row.extend(std::iter::repeat_n(Cell::Empty, 4));
                        notes.push(format!("splitting: {err}"));
                    }
                }
            } else {
                row.extend(std::iter::repeat_n(Cell::Empty, 4));
                if let Some(g) = &gate {
                    notes.push(g.clone());
                }
            }
            row.push(notes.join("; ").into());
            row
        })
        .collect();
    let mut t = Table::new(&[
        "h",
        "h_ln_w",
        "re_w",
        "im_w",
        "route_gap",
        "ln_wkb_upper",
        "ln_wkb_lower",
        "envelope_ratio",
        "gap",
        "ratio",
        "h_ln_gap",
        "floor_flag",
        "note",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}
