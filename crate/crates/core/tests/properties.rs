use azimodes::coupling::{build, truncation_order, CouplingMatrix};
use azimodes::decomp::{decompose, schmidt_number};
use azimodes::scatter::{bogolyubov_gains, effective_mode_number, intensity};
use azimodes::specfun::scaled_infeld_row;
use azimodes::{ChiVariant, Side};
use proptest::prelude::*;

fn chi_of(which: bool) -> ChiVariant {
    if which {
        ChiVariant::Chi1
    } else {
        ChiVariant::Chi2
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn infeld_row_shape(tau in 1e-4f64..2000.0) {
        let n = truncation_order(tau, 1e-12).unwrap();
        let row = scaled_infeld_row(tau, n).unwrap();
        let v = row.values();
        prop_assert!(v[0] <= 1.0 && v[0] > 0.0);
        for w in v.windows(2) {
            prop_assert!(w[1] < w[0] && w[1] > 0.0);
        }
    }

    #[test]
    fn flipping_the_coupling_sign_keeps_observables(tau in 0.0f64..60.0, gain in 0.05f64..2.5, which: bool) {
        let chi = chi_of(which);
        let n_max = truncation_order(tau, 1e-12).unwrap();
        let h = build(chi, tau, n_max).unwrap();
        let flipped = CouplingMatrix::from_entries(chi, tau, -h.entries().clone()).unwrap();
        let a = decompose(&h).unwrap();
        let b = decompose(&flipped).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x.abs() - y.abs()).abs() < 1e-12);
        }
        let ga = bogolyubov_gains(&a, gain).unwrap();
        let gb = bogolyubov_gains(&b, gain).unwrap();
        let ka = effective_mode_number(&ga).unwrap();
        let kb = effective_mode_number(&gb).unwrap();
        prop_assert!(((ka - kb) / ka).abs() < 1e-10);
        let n = (4 * n_max).next_power_of_two();
        let ia = intensity(&a, &ga, Side::Idler, n, 0).unwrap();
        let ib = intensity(&b, &gb, Side::Idler, n, 0).unwrap();
        let peak = ia.total.iter().cloned().fold(0.0, f64::max);
        for (x, y) in ia.total.iter().zip(&ib.total) {
            prop_assert!((x - y).abs() <= 1e-10 * peak);
        }
    }

    #[test]
    fn intensity_is_a_sum_of_nonnegative_modes(tau in 0.0f64..100.0, gain in 0.0f64..3.0, which: bool, signal: bool) {
        let chi = chi_of(which);
        let n_max = truncation_order(tau, 1e-12).unwrap();
        let dec = decompose(&build(chi, tau, n_max).unwrap()).unwrap();
        let gains = bogolyubov_gains(&dec, gain).unwrap();
        let side = if signal { Side::Signal } else { Side::Idler };
        let i = intensity(&dec, &gains, side, (4 * n_max).next_power_of_two(), dec.len()).unwrap();
        let per = i.per_mode.as_ref().unwrap();
        for k in 0..i.phi.len() {
            prop_assert!(i.total[k] >= 0.0);
            let s: f64 = per.iter().map(|m| m[k]).sum();
            prop_assert!((s - i.total[k]).abs() <= 1e-10 * (1.0 + i.total[k]));
        }
        let expected = gains.total_photons();
        if expected > 0.0 {
            prop_assert!(((i.integral() - expected) / expected).abs() < 1e-8);
        }
    }

    #[test]
    fn mode_number_falls_with_gain(tau in 0.01f64..400.0, g1 in 0.01f64..2.0, dg in 0.01f64..2.0, which: bool) {
        let chi = chi_of(which);
        let n_max = truncation_order(tau, 1e-12).unwrap();
        let dec = decompose(&build(chi, tau, n_max).unwrap()).unwrap();
        let k1 = effective_mode_number(&bogolyubov_gains(&dec, g1).unwrap()).unwrap();
        let k2 = effective_mode_number(&bogolyubov_gains(&dec, g1 + dg).unwrap()).unwrap();
        prop_assert!(k1 >= 1.0 - 1e-12);
        prop_assert!(k2 <= k1 * (1.0 + 1e-12));
    }

    #[test]
    fn weak_gain_recovers_schmidt_number(tau in 0.0f64..1600.0, which: bool) {
        let chi = chi_of(which);
        let n_max = truncation_order(tau, 1e-12).unwrap();
        let dec = decompose(&build(chi, tau, n_max).unwrap()).unwrap();
        let gain = 1e-3 / dec.values()[0].abs();
        let k = effective_mode_number(&bogolyubov_gains(&dec, gain).unwrap()).unwrap();
        let schmidt = schmidt_number(&dec).unwrap();
        prop_assert!(((k - schmidt) / schmidt).abs() < 1e-3);
    }
}
