use azimodes::coupling::{build, truncation_order};
use azimodes::decomp::{decompose, min_grid, mode_function};
use azimodes::oracle::{
    infeld_quadrature, infeld_series, kernel_fourier_matrix, kernel_singular_values, kernel_svd,
    perturbative_intensity, propagate_moments,
};
use azimodes::scatter::{bogolyubov_gains, intensity, scattering_kernels};
use azimodes::specfun::scaled_infeld_row;
use azimodes::{ChiVariant, Side};

const BOTH: [ChiVariant; 2] = [ChiVariant::Chi1, ChiVariant::Chi2];

fn grid_for(n_max: usize) -> usize {
    min_grid(n_max).next_power_of_two()
}

#[test]
fn infeld_matches_quadrature() {
    for &tau in &[0.04, 0.5, 4.0, 40.0, 400.0] {
        let row = scaled_infeld_row(tau, 50).unwrap();
        for n in 0..=50 {
            let q = infeld_quadrature(n, tau).unwrap();
            let v = row.values()[n];
            assert!(
                (v - q).abs() <= 1e-10 * q.abs() + 1e-13,
                "tau={tau} n={n}: {v:e} vs {q:e}"
            );
        }
    }
}

#[test]
fn infeld_matches_series_to_tight_tolerance() {
    for &tau in &[0.0005, 0.04, 0.5, 4.0, 40.0] {
        let row = scaled_infeld_row(tau, 50).unwrap();
        for n in 0..=50 {
            let s = infeld_series(n, tau).unwrap();
            if s < 1e-290 {
                continue;
            }
            assert!(((row.values()[n] - s) / s).abs() < 1e-12, "tau={tau} n={n}");
        }
    }
    for &tau in &[400.0, 1600.0] {
        let row = scaled_infeld_row(tau, 50).unwrap();
        for n in 0..=50 {
            let s = infeld_series(n, tau).unwrap();
            assert!(((row.values()[n] - s) / s).abs() < 1e-10, "tau={tau} n={n}");
        }
    }
}

#[test]
fn large_argument_against_quadrature() {
    let v = scaled_infeld_row(1600.0, 0).unwrap().values()[0];
    let q = infeld_quadrature(0, 1600.0).unwrap();
    assert!(((v - q) / q).abs() < 1e-10);
    let asymptote = 1.0 / (2.0 * std::f64::consts::PI * 1600.0).sqrt();
    assert!(((v - asymptote) / asymptote).abs() < 1e-3);
}

#[test]
fn generating_function_sum_rule() {
    for &tau in &[0.04, 0.5, 4.0, 40.0, 400.0, 1600.0] {
        let n = truncation_order(tau, 1e-16).unwrap();
        let row = scaled_infeld_row(tau, n).unwrap();
        let v = row.values();
        let sum = v[0] + 2.0 * v[1..].iter().sum::<f64>();
        assert!((sum - 1.0).abs() < 1e-12, "tau={tau}: {sum}");
    }
}

#[test]
fn truncation_order_matches_series_scan() {
    let expected = (8..)
        .find(|&n| infeld_series(n, 4.0).unwrap() < 1e-12)
        .unwrap();
    assert_eq!(truncation_order(4.0, 1e-12).unwrap(), expected);
}

#[test]
fn coupling_matches_kernel_projection() {
    for chi in BOTH {
        for &tau in &[0.04, 0.5, 4.0, 40.0] {
            let h = build(chi, tau, 20).unwrap();
            let oracle = kernel_fourier_matrix(chi, tau, 20, 256).unwrap();
            let diff = (h.entries() - &oracle).abs().max();
            assert!(diff < 1e-10, "{chi} tau={tau}: {diff:e}");
        }
    }
}

fn check_values_against_grid(chi: ChiVariant, tau: f64, n: usize) {
    let n_max = truncation_order(tau, 1e-12).unwrap();
    let dec = decompose(&build(chi, tau, n_max).unwrap()).unwrap();
    let sv = kernel_singular_values(chi, tau, n).unwrap();
    let lead = dec.values()[0].abs();
    for (j, (r, s)) in dec.values().iter().zip(&sv).take(20).enumerate() {
        let a = r.abs();
        assert!(
            (a - s).abs() <= 1e-8 * a + 1e-12 * lead,
            "{chi} tau={tau} j={j}: {a:e} vs {s:e}"
        );
    }
}

#[test]
fn values_match_grid_kernel_svd() {
    for chi in BOTH {
        for &tau in &[0.0, 0.5, 4.0, 40.0] {
            check_values_against_grid(chi, tau, 1024);
        }
    }
}

#[test]
fn grid_singular_values_converge() {
    let coarse = kernel_singular_values(ChiVariant::Chi1, 40.0, 512).unwrap();
    let fine = kernel_singular_values(ChiVariant::Chi1, 40.0, 1024).unwrap();
    for j in 0..20 {
        assert!(((coarse[j] - fine[j]) / fine[j]).abs() < 1e-9, "j={j}");
    }
}

#[test]
fn tail_extension_leaves_leading_values() {
    for chi in BOTH {
        for &tau in &[4.0f64, 40.0, 400.0] {
            let n = truncation_order(tau, 1e-12).unwrap();
            let a = decompose(&build(chi, tau, n).unwrap()).unwrap();
            let b = decompose(&build(chi, tau, n + n / 4).unwrap()).unwrap();
            for j in 0..20 {
                let (x, y) = (a.values()[j].abs(), b.values()[j].abs());
                assert!(((x - y) / y).abs() < 1e-10, "{chi} tau={tau} j={j}");
            }
        }
    }
}

#[test]
fn leading_mode_shape_matches_grid_mode() {
    let tau = 4.0;
    let n_max = truncation_order(tau, 1e-12).unwrap();
    let dec = decompose(&build(ChiVariant::Chi1, tau, n_max).unwrap()).unwrap();
    let n = 1024;
    let grid = kernel_svd(ChiVariant::Chi1, tau, n).unwrap();
    let f = mode_function(&dec, 0, Side::Idler, n).unwrap();
    let scale = n as f64 / (2.0 * std::f64::consts::PI);
    let sup = f
        .intensity()
        .iter()
        .enumerate()
        .map(|(k, u2)| (u2 - scale * grid.idler_modes[(k, 0)].powi(2)).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-6, "{sup:e}");
}

#[test]
fn kernel_moments_match_propagation() {
    let tau = 4.0;
    let n_max = truncation_order(tau, 1e-12).unwrap();
    for chi in BOTH {
        let h = build(chi, tau, n_max).unwrap();
        let dec = decompose(&h).unwrap();
        for &g in &[0.1, 1.0, 2.0] {
            let gains = bogolyubov_gains(&dec, g).unwrap();
            let k = scattering_kernels(&dec, &gains, grid_for(n_max)).unwrap();
            let oracle = propagate_moments(&h, g).unwrap();
            for (side, reference) in [(Side::Idler, &oracle.idler), (Side::Signal, &oracle.signal)]
            {
                let m = k.fourier_second_moments(side);
                let diff = m
                    .iter()
                    .zip(reference.iter())
                    .map(|(z, r)| (z - r).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-10, "{chi} g={g} {side}: {diff:e}");
            }
        }
    }
}

#[test]
fn analytic_moments_match_propagation() {
    for chi in BOTH {
        for &tau in &[0.5, 4.0, 40.0] {
            let n_max = truncation_order(tau, 1e-12).unwrap().min(64);
            let h = build(chi, tau, n_max).unwrap();
            let dec = decompose(&h).unwrap();
            let gains = bogolyubov_gains(&dec, 1.0).unwrap();
            let occ = gains.occupations();
            let w = dec.left();
            let analytic = w.transpose()
                * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(occ))
                * w;
            let oracle = propagate_moments(&h, 1.0).unwrap();
            let diff = (analytic - oracle.idler).abs().max();
            assert!(diff < 1e-10, "{chi} tau={tau}: {diff:e}");
        }
    }
}

#[test]
fn low_gain_intensity_matches_first_order() {
    for chi in BOTH {
        let tau = 4.0f64;
        let n_max = truncation_order(tau, 1e-12).unwrap();
        let dec = decompose(&build(chi, tau, n_max).unwrap()).unwrap();
        let gain_lg = 0.01 / dec.values()[0].abs();
        let gains = bogolyubov_gains(&dec, gain_lg).unwrap();
        let n = 256;
        let exact = intensity(&dec, &gains, Side::Idler, n, 0).unwrap();
        let first = perturbative_intensity(chi, tau, gain_lg, n).unwrap();
        let peak = first.iter().cloned().fold(0.0, f64::max);
        for (a, b) in exact.total.iter().zip(&first) {
            assert!((a - b).abs() <= 1e-3 * peak, "{chi}: {a:e} vs {b:e}");
        }
    }
}
