mod common;

use proptest::prelude::*;
use wonc_core::norms::{
    banach_renorm, luxemburg_norm, phi_moment, sup_moment_at, weak_lp_norm, weak_orlicz_norm, weak_orlicz_norm_lambda,
};
use wonc_core::numeric::log_grid;
use wonc_core::spectral::singular_spectrum;
use wonc_core::{OrliczFunction, SingularSpectrum};

/// sup over a grid of s·λ_s^{1/p}, with extra points just below every jump
/// where the supremum of the step function is approached.
fn grid_weak_lp(s: &SingularSpectrum, p: f64) -> f64 {
    let mut levels = log_grid(s.values()[0] * 1e-6, s.values()[0], 2048);
    levels.extend(s.values().iter().map(|v| v * (1.0 - 1e-9)));
    levels.into_iter().map(|l| l * s.lambda_at(l).powf(1.0 / p)).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(common::config(128))]

    #[test]
    fn mu_and_lambda_forms_agree(x in common::tracial(6), phi in common::phi_named()) {
        let s = singular_spectrum(&x).unwrap();
        let mu = weak_orlicz_norm(&s, &phi).value;
        let lambda = weak_orlicz_norm_lambda(&s, &phi).value;
        prop_assert!((mu - lambda).abs() <= 1e-9 * mu);
    }

    #[test]
    fn norm_is_attained(x in common::tracial(6), phi in common::phi_named()) {
        let s = singular_spectrum(&x).unwrap();
        let n = weak_orlicz_norm(&s, &phi).value;
        if n > 0.0 {
            prop_assert!(sup_moment_at(&s, &phi, n) <= 1.0 + 1e-9);
            prop_assert!(sup_moment_at(&s, &phi, n * (1.0 - 1e-6)) > 1.0);
        }
    }

    #[test]
    fn power_case_is_exact(x in common::tracial(6), p in 1.0..6.0f64) {
        let s = singular_spectrum(&x).unwrap();
        let phi = OrliczFunction::power(p).unwrap();
        let w = weak_orlicz_norm(&s, &phi).value;
        let closed = s.steps().map(|(v, t)| v * t.powf(1.0 / p)).fold(0.0, f64::max);
        prop_assert_eq!(w, closed);
        prop_assert_eq!(weak_lp_norm(&s, p).unwrap().value, w);
        if w > 0.0 {
            prop_assert!(common::rel(grid_weak_lp(&s, p), w) <= 1e-6);
        }
    }

    #[test]
    fn homogeneity_is_exact(x in common::tracial(6), phi in common::phi_named(), k in -6i32..6) {
        let s = singular_spectrum(&x).unwrap();
        let a = 2f64.powi(k);
        let n = weak_orlicz_norm(&s, &phi).value;
        let scaled = singular_spectrum(&x.scale_real(-a)).unwrap();
        prop_assert_eq!(weak_orlicz_norm(&scaled, &phi).value, a * n);
    }

    #[test]
    fn quasi_triangle_and_domination((x, y) in common::tracial_pair(6), phi in common::phi_named()) {
        let (sx, sy) = (singular_spectrum(&x).unwrap(), singular_spectrum(&y).unwrap());
        let ssum = singular_spectrum(&x.add(&y).unwrap()).unwrap();
        let n = |s: &SingularSpectrum| weak_orlicz_norm(s, &phi).value;
        prop_assert!(n(&ssum) <= 2.0 * (n(&sx) + n(&sy)));
        let lux = luxemburg_norm(&sx, &phi).value;
        prop_assert!(n(&sx) <= lux * (1.0 + 1e-10));
    }

    #[test]
    fn moment_below_unit_norm(x in common::tracial(6), phi in common::phi_named(), a in 0.01..=1.0f64) {
        let s = singular_spectrum(&x).unwrap();
        let n = weak_orlicz_norm(&s, &phi).value;
        if n > 0.0 {
            let y = s.scaled(a / n);
            let ny = weak_orlicz_norm(&y, &phi).value;
            prop_assert!(phi_moment(&y, &phi).value <= ny * (1.0 + 1e-12));
        }
    }

    #[test]
    fn banach_renorm_is_an_equivalent_norm((x, y) in common::tracial_pair(5), phi in common::phi_reflexive()) {
        let (sx, sy) = (singular_spectrum(&x).unwrap(), singular_spectrum(&y).unwrap());
        let ssum = singular_spectrum(&x.add(&y).unwrap()).unwrap();
        let b = |s: &SingularSpectrum| banach_renorm(s, &phi).value;
        prop_assert!(b(&ssum) <= b(&sx) + b(&sy) + 1e-8);
        let w = weak_orlicz_norm(&sx, &phi).value;
        prop_assert!(b(&sx) >= w * (1.0 - 1e-12));
    }

    #[test]
    fn monotone_in_phi(x in common::tracial(6), p in 1.5..5.0f64, lambda in 1.0..4.0f64) {
        let s = singular_spectrum(&x).unwrap();
        let small = OrliczFunction::power(p).unwrap();
        let large = OrliczFunction::scaled_power(lambda, p).unwrap();
        prop_assert!(weak_orlicz_norm(&s, &small).value <= weak_orlicz_norm(&s, &large).value * (1.0 + 1e-15));
    }

    #[test]
    fn power_sin_is_equivalent_to_its_power(x in common::tracial(6), p in 2.6..5.0f64, c in 0.05..0.3f64) {
        let s = singular_spectrum(&x).unwrap();
        let phi = OrliczFunction::power_sin(p, c).unwrap();
        let lp = weak_lp_norm(&s, p).unwrap().value;
        let n = weak_orlicz_norm(&s, &phi).value;
        prop_assert!(n >= (1.0 - c).powf(1.0 / p) * lp * (1.0 - 1e-12));
        prop_assert!(n <= (1.0 + c).powf(1.0 / p) * lp * (1.0 + 1e-12));
    }
}

#[test]
fn golden_values() {
    let s = SingularSpectrum::uniform(&[3.0, 2.0, 1.0], 1.0 / 3.0).unwrap();
    let phi = OrliczFunction::power(2.0).unwrap();
    assert!((weak_orlicz_norm(&s, &phi).value - 3f64.sqrt()).abs() <= 1e-9);
    assert!((luxemburg_norm(&s, &phi).value - (14.0f64 / 3.0).sqrt()).abs() <= 1e-9);
    assert!((banach_renorm(&s, &phi).value - 5.0 / 6f64.sqrt()).abs() <= 1e-7);
    assert!((phi_moment(&s, &phi).value - 3.0).abs() <= 1e-9);
}

#[test]
fn zero_spectrum_is_zero_everywhere() {
    let s = SingularSpectrum::uniform(&[0.0, 0.0], 0.5).unwrap();
    for phi in ["pow:2", "plog:2,1", "psin:3,0.2"] {
        let phi: OrliczFunction = phi.parse().unwrap();
        assert_eq!(weak_orlicz_norm(&s, &phi).value, 0.0);
        assert_eq!(weak_orlicz_norm_lambda(&s, &phi).value, 0.0);
        assert_eq!(luxemburg_norm(&s, &phi).value, 0.0);
        assert_eq!(banach_renorm(&s, &phi).value, 0.0);
        assert_eq!(phi_moment(&s, &phi).value, 0.0);
    }
}
