//! Radial fibers of the single-well magnetic operator.
//!
//! For angular mode `m` the fiber acts on `L^2((0, R), r dr)` as
//! `-h^2 (u'' + u'/r) + (h m / r - r / 2)^2 u + v0(r) u` with a Dirichlet
//! condition at `R`. It is discretised in flux form on the cell-centred grid
//! `r_i = (i - 1/2) dr`, `i = 1..n`, `R = (n + 1/2) dr`; the scaling
//! `w_i = sqrt(r_i) u_i` makes the matrix symmetric tridiagonal. Eigenvalues
//! are Richardson-extrapolated over grid doubling; the ground eigenvector is
//! taken from a separate fine grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tridiag::{bisect_eigenvalue, symm_tridiag_lowest};
use crate::numerics::{loglog_fit, PowerFit};
use crate::potential::RadialWell;

/// Scalar potential added to the magnetic part of a fiber.
#[derive(Debug, Clone)]
pub enum FiberPotential {
    Free,
    /// `mu r^2` on the whole half-line.
    Harmonic { mu: f64 },
    Well(RadialWell),
}

impl FiberPotential {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match self {
            FiberPotential::Free => 0.0,
            FiberPotential::Harmonic { mu } => mu * r * r,
            FiberPotential::Well(w) => w.value(r),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiberProblem {
    pub m: i32,
    pub h: f64,
    pub radius: f64,
    /// Base grid size; the eigenvalue extrapolation doubles from here.
    pub n: usize,
    pub potential: FiberPotential,
}

/// Truncation radius used throughout: `max(3 sqrt(40 h), a + 6, L + 4)`.
pub fn default_radius(h: f64, a: f64, l: f64) -> f64 {
    (3.0 * (40.0 * h).sqrt()).max(a + 6.0).max(l + 4.0)
}

/// Base grid size resolving the magnetic length `sqrt(h)` with 40 cells.
pub fn default_grid(h: f64, radius: f64) -> usize {
    ((radius * 40.0 / h.sqrt()).ceil() as usize).max(400)
}

/// Target spacing of the eigenvector grid.
pub const VECTOR_DR: f64 = 1e-4;
const MAX_POINTS: usize = 1 << 20;
const CONVERGENCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialEigenSolution {
    pub m: i32,
    pub h: f64,
    pub radius: f64,
    /// Lowest fiber eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Change of the extrapolated energies over the last grid doubling.
    pub energy_error: f64,
    /// Spacing of the eigenvector grid, nodes at `(i + 1/2) dr`, `i = 0..`.
    pub dr: f64,
    /// Ground eigenfunction, positive, with `sum 2 pi u_i^2 r_i dr = 1`.
    pub u: Vec<f64>,
    /// Lowest energy of each scanned mode (filled by [`ground_state`]).
    pub mode_energies: Vec<(i32, f64)>,
}

impl RadialEigenSolution {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Largest radius at which [`Self::ln_u_at`] is meaningful.
    pub fn max_radius(&self) -> f64 {
        self.node(self.u.len().saturating_sub(4))
    }

    /// `ln u(rho)` by cubic interpolation of `ln u` in the node index; the
    /// profile is mirrored evenly through the origin.
    pub fn ln_u_at(&self, rho: f64) -> f64 {
        let n = self.u.len() as isize;
        let x = rho.abs() / self.dr - 0.5;
        let base = (x.floor() as isize).clamp(-1, n - 3);
        let t = x - base as f64;
        let sample = |k: isize| {
            let idx = if k < 0 { -k - 1 } else { k };
            self.u[idx.min(n - 1) as usize].ln()
        };
        let (f0, f1, f2, f3) = (sample(base - 1), sample(base), sample(base + 1), sample(base + 2));
        // Lagrange nodes at -1, 0, 1, 2 relative to `base`.
        let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3
    }

    pub fn u_at(&self, rho: f64) -> f64 {
        self.ln_u_at(rho).exp()
    }

    /// `sum 2 pi u_i^2 r_i dr`.
    pub fn norm_squared(&self) -> f64 {
        self.u
            .iter()
            .enumerate()
            .map(|(i, u)| u * u * self.node(i))
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI
            * self.dr
    }
}

fn validate(p: &FiberProblem) -> Result<()> {
    if !(p.h > 0.0 && p.h.is_finite()) {
        return Err(Error::domain(format!("h must be positive, got {}", p.h)));
    }
    if p.n < 400 {
        return Err(Error::Precondition(format!("grid size {} below 400", p.n)));
    }
    // Gaussian weight exp(-R^2 / 4h) must be negligible.
    if p.radius * p.radius / (4.0 * p.h) < 14.0 * std::f64::consts::LN_10 {
        return Err(Error::Precondition(format!(
            "radius {} too small for h = {}; use at least {}",
            p.radius,
            p.h,
            (4.0 * p.h * 14.0 * std::f64::consts::LN_10).sqrt()
        )));
    }
    if let FiberPotential::Harmonic { mu } = p.potential {
        if !(mu >= 0.0) {
            return Err(Error::domain("oscillator strength must be nonnegative"));
        }
    }
    Ok(())
}

/// Symmetric tridiagonal matrix of the fiber on `n` cells.
pub fn fiber_matrix(p: &FiberProblem, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let dr = p.radius / (n as f64 + 0.5);
    let h2 = p.h * p.h / (dr * dr);
    let hm = p.h * p.m as f64;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        let r = (i as f64 + 0.5) * dr;
        let r_minus = i as f64 * dr;
        let r_plus = (i as f64 + 1.0) * dr;
        let mag = hm / r - 0.5 * r;
        diag.push(h2 * (r_plus + r_minus) / r + mag * mag + p.potential.value(r));
        if i + 1 < n {
            off.push(-h2 * r_plus / (r * (r + dr)).sqrt());
        }
    }
    (diag, off, dr)
}

fn grid_eigenvalues(p: &FiberProblem, n: usize, k: usize) -> Vec<f64> {
    let (diag, off, _) = fiber_matrix(p, n);
    (0..k).map(|j| bisect_eigenvalue(&diag, &off, j)).collect()
}

/// Lowest `k` eigenvalues, Richardson-extrapolated and converged to 1e-8.
pub fn fiber_energies(p: &FiberProblem, k: usize) -> Result<(Vec<f64>, f64)> {
    validate(p)?;
    if k == 0 {
        return Err(Error::argument("need at least one eigenvalue"));
    }
    let mut n = p.n;
    let mut coarse = grid_eigenvalues(p, n, k);
    let mut fine = grid_eigenvalues(p, 2 * n, k);
    let extrapolate = |c: &[f64], f: &[f64]| -> Vec<f64> {
        c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let mut previous = extrapolate(&coarse, &fine);
    loop {
        n *= 2;
        if 2 * n > MAX_POINTS {
            let last = extrapolate(&coarse, &fine);
            return Err(Error::Accuracy {
                what: format!("fiber m={} eigenvalues under grid doubling", p.m),
                estimate: last[0],
                error_bound: (last[0] - previous[0]).abs(),
            });
        }
        coarse = fine;
        fine = grid_eigenvalues(p, 2 * n, k);
        let current = extrapolate(&coarse, &fine);
        let change = current
            .iter()
            .zip(&previous)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if change <= CONVERGENCE {
            return Ok((current, change));
        }
        previous = current;
    }
}

/// Ground eigenfunction on a grid of spacing about [`VECTOR_DR`], normalised
/// in `L^2(2 pi r dr)` and made positive.
pub fn fiber_ground_vector(p: &FiberProblem) -> Result<(Vec<f64>, f64)> {
    validate(p)?;
    let n = ((p.radius / VECTOR_DR).ceil() as usize).clamp(p.n, MAX_POINTS);
    let (diag, off, dr) = fiber_matrix(p, n);
    let eig = symm_tridiag_lowest(&diag, &off, 1)?;
    let w = &eig.vectors[0];
    let sign = if w.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    // u = w / sqrt(r); sum 2 pi w^2 dr = 1 after scaling.
    let scale = sign / (2.0 * std::f64::consts::PI * dr).sqrt();
    let u: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, wi)| scale * wi / ((i as f64 + 0.5) * dr).sqrt())
        .collect();
    Ok((u, dr))
}

pub fn solve_fiber(p: &FiberProblem, k: usize) -> Result<RadialEigenSolution> {
    let (energies, energy_error) = fiber_energies(p, k)?;
    let (u, dr) = fiber_ground_vector(p)?;
    Ok(RadialEigenSolution {
        m: p.m,
        h: p.h,
        radius: p.radius,
        energies,
        energy_error,
        dr,
        u,
        mode_energies: Vec::new(),
    })
}

/// Radial ground state of the single-well operator: scans `m` in `-2..=2`,
/// requires the minimum at `m = 0`, returns the two lowest `m = 0` energies
/// and the normalised positive eigenfunction.
pub fn ground_state(well: &RadialWell, h: f64, radius: f64, n: usize) -> Result<RadialEigenSolution> {
    let problem = |m: i32| FiberProblem {
        m,
        h,
        radius,
        n,
        potential: FiberPotential::Well(well.clone()),
    };
    let modes: Vec<i32> = (-2..=2).collect();
    let scans: Vec<Result<(i32, f64)>> = modes
        .par_iter()
        .map(|&m| fiber_energies(&problem(m), 1).map(|(e, _)| (m, e[0])))
        .collect();
    let mode_energies = scans.into_iter().collect::<Result<Vec<_>>>()?;
    let mut solution = solve_fiber(&problem(0), 2)?;
    let e0 = solution.energies[0];
    if let Some(&(m, e)) = mode_energies.iter().find(|(m, e)| *m != 0 && *e <= e0 + CONVERGENCE) {
        return Err(Error::Invariant(format!(
            "ground energy not attained at m = 0: mode {m} has {e} <= {e0} (h = {h} too large or grid too coarse)"
        )));
    }
    let interior = solution.u.len().saturating_sub(3);
    if solution.u[..interior].iter().any(|u| !(*u > 0.0)) {
        return Err(Error::Invariant("ground eigenfunction is not positive".into()));
    }
    solution.mode_energies = mode_energies;
    Ok(solution)
}

/// Ground state with the default radius and grid for a double well of
/// separation `l`.
pub fn ground_state_for(well: &RadialWell, h: f64, l: f64) -> Result<RadialEigenSolution> {
    let radius = default_radius(h, well.a(), l);
    ground_state(well, h, radius, default_grid(h, radius))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicPoint {
    pub h: f64,
    pub e_sw: f64,
    /// `|e_sw - v_min - h sqrt(1 + 2 v0''(0))|`.
    pub residual: f64,
    /// Second `m = 0` energy and the lowest energy of modes `m != 0`.
    pub second: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub points: Vec<HarmonicPoint>,
    pub fit: Option<PowerFit>,
    pub floor_reached: bool,
}

/// Fits `|e_sw(h) - v_min - h E1| ~ C h^p` over a sweep of `h`.
pub fn harmonic_expansion_check(well: &RadialWell, h_list: &[f64], l: f64) -> Result<HarmonicReport> {
    if h_list.len() < 5 {
        return Err(Error::argument("insufficient points: need at least 5 values of h"));
    }
    if h_list.iter().any(|h| !(*h > 0.0 && *h <= 0.3)) {
        return Err(Error::domain("harmonic check needs h in (0, 0.3]"));
    }
    let points = h_list
        .par_iter()
        .map(|&h| {
            let s = ground_state_for(well, h, l)?;
            let e_sw = s.ground_energy();
            let others = s
                .mode_energies
                .iter()
                .filter(|(m, _)| *m != 0)
                .map(|(_, e)| *e)
                .fold(s.energies[1], f64::min);
            Ok(HarmonicPoint {
                h,
                e_sw,
                residual: (e_sw - well.v_min() - h * well.e1()).abs(),
                second: others,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let floor_reached = points.iter().all(|p| p.residual <= 10.0 * CONVERGENCE);
    let fit = if floor_reached {
        None
    } else {
        let hs: Vec<f64> = points.iter().map(|p| p.h).collect();
        let rs: Vec<f64> = points.iter().map(|p| p.residual).collect();
        Some(loglog_fit(&hs, &rs)?)
    };
    Ok(HarmonicReport {
        points,
        fit,
        floor_reached,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AgmonIdentityReport {
    /// `|e <v,v> - h^2 |v'|^2 - <(w - phi'^2) v, v>| / (|e| <v,v>)`, `v = e^{phi/h} u`.
    pub residual: f64,
    pub gradient_term: f64,
    pub potential_term: f64,
    /// `max_r e^{phi(r)/h} u(r)`.
    pub weighted_sup: f64,
    /// `int e^{2 phi/h} u^2 2 pi r dr`.
    pub weighted_mass: f64,
}

/// Energy identity for radial `u` and radial weight `phi` (given with its
/// derivative), evaluated with the discrete flux form of the solver:
/// `e |v|^2 = h^2 |v'|^2 + int (r^2/4 + v0 - phi'^2) v^2` with `v = e^{phi/h} u`.
pub fn agmon_identity_check<F>(solution: &RadialEigenSolution, well: &RadialWell, phi: F) -> AgmonIdentityReport
where
    F: Fn(f64) -> (f64, f64),
{
    let h = solution.h;
    let dr = solution.dr;
    let e = solution.ground_energy();
    let n = solution.u.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let weight: Vec<(f64, f64)> = (0..n).map(|i| phi(solution.node(i))).collect();
    // Work relative to the largest exponent to avoid overflow.
    let shift = (0..n)
        .map(|i| weight[i].0 / h + solution.u[i].ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<f64> = (0..n)
        .map(|i| (weight[i].0 / h + solution.u[i].ln() - shift).exp())
        .collect();
    let mut mass = 0.0;
    let mut potential = 0.0;
    for i in 0..n {
        let r = solution.node(i);
        let w = 0.25 * r * r + well.value(r) - weight[i].1 * weight[i].1;
        mass += v[i] * v[i] * r;
        potential += w * v[i] * v[i] * r;
    }
    let mut gradient = 0.0;
    for i in 0..n {
        let next = if i + 1 < n { v[i + 1] } else { 0.0 };
        let r_plus = (i as f64 + 1.0) * dr;
        gradient += r_plus * (next - v[i]) * (next - v[i]) / (dr * dr);
    }
    gradient *= h * h;
    let residual = (e * mass - gradient - potential).abs() / (e.abs().max(1e-300) * mass);
    let scale = (2.0 * shift).exp() * two_pi * dr;
    AgmonIdentityReport {
        residual,
        gradient_term: gradient * scale,
        potential_term: potential * scale,
        weighted_sup: shift.exp(),
        weighted_mass: mass * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(m: i32, h: f64) -> FiberProblem {
        let radius = default_radius(h, 0.0, 0.0);
        FiberProblem {
            m,
            h,
            radius,
            n: 800,
            potential: FiberPotential::Free,
        }
    }

    #[test]
    fn landau_ground_level() {
        let (e, _) = fiber_energies(&free(0, 1.0), 2).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-6, "{e:?}");
        assert!((e[1] - 3.0).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn landau_fibers() {
        // 2n + |m| - m + 1
        for m in [-2, -1, 1, 2] {
            let (e, _) = fiber_energies(&free(m, 1.0), 1).unwrap();
            let want = (m.abs() - m + 1) as f64;
            assert!((e[0] - want).abs() < 1e-6, "m={m}: {}", e[0]);
        }
    }

    #[test]
    fn oscillator_ground_levels() {
        for mu in [0.5, 1.0, 2.0] {
            let p = FiberProblem {
                potential: FiberPotential::Harmonic { mu },
                ..free(0, 1.0)
            };
            let (e, _) = fiber_energies(&p, 1).unwrap();
            assert!((e[0] - (1.0f64 + 4.0 * mu).sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn radius_precondition() {
        let p = FiberProblem {
            radius: 1.0,
            ..free(0, 1.0)
        };
        assert!(matches!(fiber_energies(&p, 1), Err(Error::Precondition(_))));
        let p = FiberProblem { n: 100, ..free(0, 1.0) };
        assert!(fiber_energies(&p, 1).is_err());
    }

    #[test]
    fn eigenvector_normalised_and_gaussian() {
        // Lowest Landau state: u = exp(-r^2/4) / sqrt(2 pi).
        let s = solve_fiber(&free(0, 1.0), 1).unwrap();
        assert!((s.norm_squared() - 1.0).abs() < 1e-8);
        for &r in &[0.0, 0.3, 1.0, 2.5, 5.0] {
            let exact = (-r * r / 4.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((s.u_at(r) / exact - 1.0).abs() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn canonical_ground_state() {
        let w = RadialWell::bump(1.0, 1.0).unwrap();
        let s = ground_state_for(&w, 0.1, 4.0).unwrap();
        assert!((s.norm_squared() - 1.0).abs() < 1e-8);
        assert!(s.u[..s.u.len() - 3].iter().all(|u| *u > 0.0));
        let e0 = s.ground_energy();
        let em1 = s.mode_energies.iter().find(|(m, _)| *m == -1).unwrap().1;
        assert!(em1 - e0 > 0.5 * 0.1);
        // Discrete energy identity with phi = 0.
        let rep = agmon_identity_check(&s, &w, |_| (0.0, 0.0));
        assert!(rep.residual < 1e-6, "{rep:?}");
    }
}
