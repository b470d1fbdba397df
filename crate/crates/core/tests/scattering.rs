use mflab::scattering::{
    gradient_energy_identity, scattering_length_integral, smallness_parameter, solve_zero_energy,
    verify_fprop_bounds, DEFAULT_MESH,
};
use mflab::{Error, PotentialSpec};
use proptest::prelude::*;

#[test]
fn hard_sphere_length_is_its_radius() {
    let v = PotentialSpec::hard_sphere(0.5);
    let s = solve_zero_energy(&v, 5.0, DEFAULT_MESH).unwrap();
    assert!((s.a0 - 0.5).abs() < 1e-3 * 0.5);
    assert_eq!(s.f_at(0.3), 0.0);
    assert!(matches!(scattering_length_integral(&s, &v), Err(Error::Domain(_))));
}

#[test]
fn fit_and_integral_agree_for_repulsive_potentials() {
    for v in [
        PotentialSpec::square_well(1.0, 1.0),
        PotentialSpec::square_well(30.0, 0.3),
        PotentialSpec::gaussian(5.0, 0.4),
        PotentialSpec::gaussian(0.2, 1.0),
        PotentialSpec::tabulated(vec![0.0, 0.5, 1.0], vec![2.0, 1.0, 0.0]),
    ] {
        let r_max = 2.0 * v.support_radius().unwrap();
        let s = solve_zero_energy(&v, r_max, DEFAULT_MESH).unwrap();
        let i = scattering_length_integral(&s, &v).unwrap();
        assert!((i - s.a0).abs() < 1e-6 * s.a0, "{v:?}: fit {} integral {}", s.a0, i);
    }
}

#[test]
fn integral_refuses_foreign_potential() {
    let v = PotentialSpec::gaussian(1.0, 1.0);
    let s = solve_zero_energy(&v, 10.0, 1000).unwrap();
    assert!(scattering_length_integral(&s, &v.scaled(2.0)).is_err());
}

#[test]
fn rescaled_family_shrinks_length_by_n() {
    for v in [PotentialSpec::square_well(2.0, 1.0), PotentialSpec::gaussian(3.0, 0.5)] {
        let base = solve_zero_energy(&v, 10.0, DEFAULT_MESH).unwrap().a0;
        for n in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let a = solve_zero_energy(&v.gp_rescaled(n), 10.0, DEFAULT_MESH).unwrap().a0;
            assert!((a * n - base).abs() < 1e-8 * base, "N = {n}: {} vs {}", a * n, base);
        }
    }
}

#[test]
fn profile_bounds_and_monotonicity() {
    let weak = PotentialSpec::square_well(0.05, 1.0);
    let s = solve_zero_energy(&weak, 4.0, DEFAULT_MESH).unwrap();
    let rep = verify_fprop_bounds(&s).unwrap();
    assert!(rep.pass && rep.monotone);
    let rho = s.rho.unwrap();
    assert!(s.f.iter().all(|&f| f >= 1.0 - rep.c_value * rho - 1e-15));
    assert!(rep.c_value < 1.0 && rep.c_gradient < 1.0);

    let g = PotentialSpec::gaussian(8.0, 0.5);
    let rep = verify_fprop_bounds(&solve_zero_energy(&g, 6.0, DEFAULT_MESH).unwrap()).unwrap();
    assert!(rep.monotone && rep.f_max <= 1.0 + 1e-10);
}

#[test]
fn gradient_energy_identity_holds_for_solver_profile() {
    for v in [PotentialSpec::gaussian(4.0, 0.5), PotentialSpec::square_well(3.0, 1.0)] {
        let s = solve_zero_energy(&v, 8.0, DEFAULT_MESH).unwrap();
        let (lhs, rhs) = gradient_energy_identity(&s).unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} vs {rhs}");
    }
}

#[test]
fn smallness_parameter_is_linear_in_amplitude() {
    let v = PotentialSpec::gaussian(1.3, 0.8);
    let r1 = smallness_parameter(&v).unwrap();
    let r3 = smallness_parameter(&v.scaled(3.0)).unwrap();
    assert!((r3 - 3.0 * r1).abs() < 1e-12 * r3);
    assert_eq!(smallness_parameter(&PotentialSpec::zero()).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profile_stays_in_unit_interval(amp in 0.01f64..50.0, range in 0.1f64..2.0) {
        let v = PotentialSpec::gaussian(amp, range);
        let s = solve_zero_energy(&v, 8.0 * range, 2000).unwrap();
        prop_assert!(s.f.iter().all(|&f| (-1e-12..=1.0 + 1e-12).contains(&f)));
        prop_assert!(s.a0 > 0.0 && s.a0 < GAUSSIAN_SUPPORT * range);
        let i = scattering_length_integral(&s, &v).unwrap();
        prop_assert!((i - s.a0).abs() < 1e-5 * s.a0);
    }

    #[test]
    fn exterior_profile_is_exact(amp in 0.1f64..10.0, r in 0.2f64..1.5) {
        let v = PotentialSpec::square_well(amp, r);
        let s = solve_zero_energy(&v, 3.0 * r, 2000).unwrap();
        for (ri, fi) in s.r.iter().zip(&s.f).filter(|(ri, _)| **ri > r) {
            prop_assert!((fi - (1.0 - s.a0 / ri)).abs() < 1e-10);
        }
    }
}

const GAUSSIAN_SUPPORT: f64 = mflab::numerics::potential::GAUSSIAN_CUTOFF;
