//! Oracle suite: every analytic result checked against an independent
//! computation, reported as named residuals.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coupling::{build, truncation_order, ChiVariant};
use crate::decomp::{decompose, min_grid};
use crate::error::Result;
use crate::format::real;
use crate::oracle::{
    infeld_quadrature, kernel_fourier_matrix, kernel_singular_values, propagate_moments,
};
use crate::scatter::{bogolyubov_gains, intensity, scattering_kernels};
use crate::specfun::scaled_infeld_row;
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Added to the `(n, m) = (0, 1)` coupling entry before decomposing in the
    /// reconstruction check.
    pub perturb_coupling: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status}  {:width$}  residual {}  tolerance {}",
                c.name,
                real(c.residual),
                real(c.tolerance)
            );
        }
        let failed = self.failures().len();
        let _ = writeln!(out, "{} checks, {failed} failed", self.checks.len());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    }
}

const BOTH: [ChiVariant; 2] = [ChiVariant::Chi1, ChiVariant::Chi2];

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `max |a − b| / (|b| + floor)`: a relative error that stops growing once
/// `|b|` drops below `floor`.
fn floored_relative(pairs: impl Iterator<Item = (f64, f64)>, floor: f64) -> f64 {
    pairs.fold(0.0, |acc, (a, b)| {
        acc.max((a - b).abs() / (b.abs() + floor))
    })
}

fn grid_for(n_max: usize) -> usize {
    min_grid(n_max).next_power_of_two()
}

pub fn run(level: Level, options: VerifyOptions) -> Result<Report> {
    let mut s = Suite { checks: Vec::new() };
    let full = level == Level::Full;

    let infeld_taus: &[f64] = if full {
        &[0.04, 0.5, 4.0, 40.0, 400.0]
    } else {
        &[0.04, 0.5, 4.0, 40.0]
    };
    for &tau in infeld_taus {
        let row = scaled_infeld_row(tau, 50)?;
        let mut pairs = Vec::with_capacity(51);
        for n in 0..=50 {
            pairs.push((row.values()[n], infeld_quadrature(n, tau)?));
        }
        s.record(
            format!("infeld vs quadrature, tau={tau}"),
            floored_relative(pairs.into_iter(), 1e-3),
            1e-10,
        );
        let long = scaled_infeld_row(tau, truncation_order(tau, 1e-16)?)?;
        let v = long.values();
        let sum = v[0] + 2.0 * v[1..].iter().sum::<f64>();
        s.record(
            format!("infeld sum rule, tau={tau}"),
            (sum - 1.0).abs(),
            1e-12,
        );
    }

    for chi in BOTH {
        for &tau in &[0.04, 0.5, 4.0, 40.0] {
            let h = build(chi, tau, 20)?;
            let oracle = kernel_fourier_matrix(chi, tau, 20, 256)?;
            s.record(
                format!("coupling vs kernel projection, {chi}, tau={tau}"),
                max_abs(&(h.entries() - oracle)),
                1e-10,
            );
        }
    }

    let grid = if full { 1024 } else { 512 };
    for chi in BOTH {
        for &tau in &[0.0, 0.5, 4.0, 40.0] {
            let n_max = truncation_order(tau, 1e-12)?;
            let dec = decompose(&build(chi, tau, n_max)?)?;
            let sv = kernel_singular_values(chi, tau, grid)?;
            let lead = dec.values()[0].abs();
            let pairs = dec
                .values()
                .iter()
                .take(20)
                .map(|r| r.abs())
                .zip(sv.iter().copied());
            s.record(
                format!("values vs grid kernel svd, {chi}, tau={tau}, N={grid}"),
                floored_relative(pairs, 1e-4 * lead),
                1e-8,
            );
        }
    }

    let structural_taus: &[f64] = if full {
        &[0.0, 0.04, 4.0, 40.0, 400.0, 1600.0]
    } else {
        &[0.0, 0.04, 4.0, 40.0]
    };
    for chi in BOTH {
        for &tau in structural_taus {
            let n_max = truncation_order(tau, 1e-12)?;
            let mut h = build(chi, tau, n_max)?;
            if let Some(delta) = options.perturb_coupling {
                let (r, c) = (h.position(0), h.position(1));
                h.entries_mut()[(r, c)] += delta;
            }
            let dec = decompose(&h)?;
            s.record(
                format!("reconstruction, {chi}, tau={tau}"),
                max_abs(&(dec.reconstruct() - h.entries())),
                1e-10,
            );
            let eye = DMatrix::<f64>::identity(dec.len(), dec.len());
            let ortho = max_abs(&(dec.left() * dec.left().transpose() - &eye))
                .max(max_abs(&(dec.right() * dec.right().transpose() - &eye)));
            s.record(format!("orthonormality, {chi}, tau={tau}"), ortho, 1e-10);
        }
    }

    let tau = 4.0;
    let n_max = truncation_order(tau, 1e-12)?;
    let moment_taus: &[f64] = if full { &[4.0, 40.0] } else { &[4.0] };
    for chi in BOTH {
        let dec = decompose(&build(chi, tau, n_max)?)?;
        let gains = bogolyubov_gains(&dec, 2.0)?;
        s.record(
            format!("bogolyubov identity, {chi}"),
            gains.bogolyubov_residual(),
            1e-12,
        );

        let gains = bogolyubov_gains(&dec, 1.0)?;
        let kernels = scattering_kernels(&dec, &gains, 512)?;
        s.record(
            format!("kernel quasi-unitarity, {chi}, N=512"),
            kernels.quasi_unitarity_residual(),
            1e-8,
        );
        let i = intensity(&dec, &gains, Side::Idler, grid_for(n_max), 0)?;
        let expected = gains.total_photons();
        s.record(
            format!("intensity integral, {chi}"),
            ((i.integral() - expected) / expected).abs(),
            1e-8,
        );

        for &mt in moment_taus {
            let nm = truncation_order(mt, 1e-12)?;
            let h = build(chi, mt, nm)?;
            let dec = decompose(&h)?;
            for &g in &[0.1, 1.0, 2.0] {
                let gains = bogolyubov_gains(&dec, g)?;
                let kernels = scattering_kernels(&dec, &gains, grid_for(nm))?;
                let oracle = propagate_moments(&h, g)?;
                let mut residual = 0.0f64;
                for (side, reference) in
                    [(Side::Idler, &oracle.idler), (Side::Signal, &oracle.signal)]
                {
                    let m = kernels.fourier_second_moments(side);
                    for (z, r) in m.iter().zip(reference.iter()) {
                        residual = residual.max((z - r).norm());
                    }
                }
                s.record(
                    format!("moments vs propagation, {chi}, tau={mt}, gainLG={g}"),
                    residual,
                    1e-10,
                );
            }
        }
    }

    Ok(Report {
        level,
        checks: s.checks,
    })
}
