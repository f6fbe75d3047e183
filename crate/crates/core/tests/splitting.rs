use magtun_core::potential::{DoubleWellConfig, RadialWell};
use magtun_core::spectral::ground_state_for;
use magtun_core::splitting2d::{assemble, assemble_single, landau_level, lowest_two, LatticeParams, MagneticLattice};
use proptest::prelude::*;

fn canonical(h: f64) -> (DoubleWellConfig, LatticeParams) {
    let config = DoubleWellConfig::canonical();
    let p = LatticeParams::auto(&config, h);
    (config, p)
}

fn small_single(h: f64) -> MagneticLattice {
    let well = RadialWell::bump(1.0, 1.0).unwrap();
    let m = 1.0 + LatticeParams::min_margin(h);
    assemble_single(&well, h, &LatticeParams { delta: LatticeParams::max_delta(1.0, h), half_x: m, half_y: m }).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

#[test]
fn gauge_shift_leaves_the_pair_unchanged() {
    let (config, p) = canonical(0.5);
    let lat = assemble(&config, 0.5, &p).unwrap();
    let base = lowest_two(&lat).unwrap();
    for shifted in [lat.gauge_shifted(|x, y| 0.7 * x - 1.3 * y), lat.conjugated(|x, y| (x * y).sin() + x * x)] {
        let s = lowest_two(&shifted).unwrap();
        assert!(close(s.e1, base.e1, 1e-10) && close(s.e2, base.e2, 1e-10), "{} {} vs {} {}", s.e1, s.e2, base.e1, base.e2);
    }
}

#[test]
fn ground_state_modulus_is_even_in_x() {
    let (config, p) = canonical(0.5);
    let lat = assemble(&config, 0.5, &p).unwrap();
    let pair = lowest_two(&lat).unwrap();
    assert!(lat.reflection_defect(&pair.ground) <= 1e-6);
}

#[test]
fn single_well_matches_the_radial_solver() {
    let h = 0.3;
    let well = RadialWell::bump(1.0, 1.0).unwrap();
    let lat = small_single(h);
    let e1 = lowest_two(&lat).unwrap().e1;
    let e_sw = ground_state_for(&well, h, 4.0).unwrap().ground_energy();
    assert!((e1 - e_sw).abs() <= 0.02 * e_sw.abs(), "lattice {e1}, radial {e_sw}");
}

#[test]
fn refinement_and_box_growth_barely_move_the_pair() {
    let h = 0.5;
    let (config, p) = canonical(h);
    let base = lowest_two(&assemble(&config, h, &p).unwrap()).unwrap();
    let fine = lowest_two(&assemble(&config, h, &p.with_delta(p.delta / std::f64::consts::SQRT_2)).unwrap()).unwrap();
    let wide = lowest_two(&assemble(&config, h, &p.grown((2.0 * h).sqrt())).unwrap()).unwrap();
    for (b, f, w) in [(base.e1, fine.e1, wide.e1), (base.e2, fine.e2, wide.e2)] {
        assert!((f - b).abs() <= 0.01 * b.abs(), "refinement {b} -> {f}");
        assert!((w - b).abs() <= 1e-3 * b.abs(), "box growth {b} -> {w}");
    }
}

#[test]
fn gap_is_positive_and_resolved_at_moderate_h() {
    let (config, p) = canonical(0.5);
    let pair = lowest_two(&assemble(&config, 0.5, &p).unwrap()).unwrap();
    assert!(pair.gap() > 0.0 && pair.resolvable());
}

#[test]
fn free_lattice_sits_on_the_lowest_landau_level() {
    let r = landau_level(0.5, &LatticeParams { delta: 0.1, half_x: 4.0, half_y: 4.0 }).unwrap();
    assert!(r.rel_error <= 0.03, "{r:?}");
    // Second-order spacing error: the fine value is the closer one.
    assert!((r.fine - 0.5).abs() < (r.coarse - 0.5).abs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn any_node_phase_is_a_symmetry(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, k in 0.1f64..2.0) {
        let lat = small_single(0.5);
        let base = lowest_two(&lat).unwrap();
        let moved = lowest_two(&lat.conjugated(|x, y| c1 * x + c2 * y + (k * x * y).cos())).unwrap();
        prop_assert!(close(moved.e1, base.e1, 1e-10));
        prop_assert!(close(moved.e2, base.e2, 1e-10));
    }
}
