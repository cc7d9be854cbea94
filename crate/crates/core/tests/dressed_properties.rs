use num_complex::Complex64;
use proptest::prelude::*;
use slowlight_core::bath::{BathSpec, Reservoirs};
use slowlight_core::dressed::{
    dressed_populations, rates_asymptotic, rates_phenomenological, rates_time_dependent, weak_nm_coefficients,
    DriveConfig, WeakNmCoefficients,
};
use slowlight_core::units::omega0;

fn drive(omega_p: f64, delta_p: f64) -> DriveConfig {
    DriveConfig::new(omega_p * omega0(), delta_p * omega0(), 1e-3 * omega0(), 0.0).unwrap()
}

fn phonons(t: f64) -> Reservoirs {
    Reservoirs::uncorrelated(BathSpec::acoustic_phonons(t).unwrap(), BathSpec::acoustic_phonons(t).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn dressed_identity(t in -500.0f64..500.0, omega_p in 0.0f64..10.0, delta_p in -5.0f64..5.0) {
        let (s33, s22, s23) = dressed_populations(t, &drive(omega_p, delta_p));
        prop_assert!((s23.norm_sqr() - s22 * s33).abs() <= 1e-12);
    }
}

#[test]
fn couplings_vanish_without_pump_on_every_path() {
    let res = phonons(15.0);
    let d = drive(0.0, 0.7);
    let zero = Complex64::new(0.0, 0.0);
    let asym = rates_asymptotic(&d, &res).unwrap();
    assert_eq!((asym.nu2, asym.nu3), (zero, zero));
    let td = rates_time_dependent(12.0, &d, &res).unwrap();
    assert_eq!((td.nu2, td.nu3), (zero, zero));
    let ph = rates_phenomenological(&d, &weak_nm_coefficients(&res).unwrap());
    assert_eq!((ph.nu2, ph.nu3), (zero, zero));
}

#[test]
fn flat_uncorrelated_baths_never_couple_level_two() {
    let res = Reservoirs::uncorrelated(
        BathSpec::flat(omega0()).unwrap(),
        BathSpec::flat(2.0 * omega0()).unwrap(),
    )
    .unwrap();
    for i in 0..=20 {
        for j in -10..=10 {
            let r = rates_asymptotic(&drive(0.5 * i as f64, 0.5 * j as f64), &res).unwrap();
            assert!(r.nu2.norm() <= 1e-12 * omega0(), "nu2 = {} at ({i}, {j})", r.nu2);
        }
    }
}

#[test]
fn complete_correlation_washes_out_pump() {
    let res = Reservoirs::identical(BathSpec::acoustic_phonons(15.0).unwrap(), 1.0).unwrap();
    let base = rates_asymptotic(&drive(0.0, 0.0), &res).unwrap();
    for i in 1..=10 {
        let r = rates_asymptotic(&drive(i as f64, 0.0), &res).unwrap();
        for (a, b) in [(r.gamma2, base.gamma2), (r.gamma3, base.gamma3), (r.nu2, base.nu2), (r.nu3, base.nu3)] {
            assert!((a - b).norm() <= 1e-8, "{a} vs {b} at {i} Omega0");
        }
    }
}

#[test]
fn phenomenological_couplings_scale_with_pump() {
    let w0 = omega0();
    let coeffs = WeakNmCoefficients::real(w0, 2.0 * w0, 0.1, 0.2, 0.0, 0.0);
    let r = rates_phenomenological(&drive(3.0, 0.0), &coeffs);
    assert!((r.nu2.re - 0.3 * w0).abs() < 1e-15);
    assert!((r.nu3.re - 0.6 * w0).abs() < 1e-15);
    assert_eq!(r.gamma2.re, w0);
}
