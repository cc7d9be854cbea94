//! Dressed-rate routes checked against each other.

use slowlight_core::bath::{BathSpec, Reservoirs};
use slowlight_core::dressed::{
    rates_asymptotic, rates_phenomenological, rates_time_dependent, weak_nm_coefficients, DriveConfig,
    TimeDependentRates,
};
use slowlight_core::units::omega0;

fn phonons(t: f64) -> Reservoirs {
    Reservoirs::uncorrelated(BathSpec::acoustic_phonons(t).unwrap(), BathSpec::acoustic_phonons(t).unwrap()).unwrap()
}

fn drive(omega_p: f64, delta_p: f64) -> DriveConfig {
    DriveConfig::new(omega_p, delta_p, 1e-3 * omega0(), 0.0).unwrap()
}

#[test]
fn time_dependent_rates_approach_asymptotic_values() {
    let res = phonons(15.0);
    let d = drive(3.0 * omega0(), 0.5 * omega0());
    let inf = rates_asymptotic(&d, &res).unwrap();
    let t = rates_time_dependent(50.0, &d, &res).unwrap();
    for (a, b) in [(t.gamma2, inf.gamma2), (t.gamma3, inf.gamma3), (t.nu2, inf.nu2), (t.nu3, inf.nu3)] {
        assert!((a - b).norm() < 1e-3 * b.norm(), "{a} vs {b}");
    }
}

#[test]
fn tabulated_rates_match_direct_quadrature() {
    let res = phonons(45.0);
    let d = drive(2.0 * omega0(), 0.0);
    let table = TimeDependentRates::new(&d, &res).unwrap();
    for t in [0.37, 1.3, 4.05] {
        let direct = rates_time_dependent(t, &d, &res).unwrap();
        let interp = table.at(t);
        for (a, b) in [(interp.gamma2, direct.gamma2), (interp.nu2, direct.nu2)] {
            assert!((a - b).norm() < 1e-5 * direct.gamma2.norm(), "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn weak_pump_expansion_error_is_third_order() {
    let res = phonons(15.0);
    let coeffs = weak_nm_coefficients(&res).unwrap();
    let gap = |wp: f64| {
        let d = drive(wp, 0.0);
        let a = rates_asymptotic(&d, &res).unwrap();
        let p = rates_phenomenological(&d, &coeffs);
        ((a.nu2 - p.nu2).norm(), (a.gamma2 - p.gamma2).norm() / a.gamma2.norm())
    };
    let (n1, g1) = gap(0.5 * omega0());
    let (n2, _) = gap(0.25 * omega0());
    eprintln!("nu2 gaps {n1:e} {n2:e} ratio {} ; gamma2 rel gap {g1:e}", n1 / n2);
    assert!(g1 < 1e-2);
    assert!(n1 / n2 >= 4.0);
}
