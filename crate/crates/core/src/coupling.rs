//! Coupling matrices of the nonlinear interaction in the azimuthal Fourier basis.
//!
//! Row index `n` is the idler Fourier index, column index `m` pairs with the
//! signal operator of index `-m`. Both variants only connect indices that
//! differ by 0 or ±2, so even and odd indices never mix.

use std::fmt;
use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::format::real;
use crate::scalar::Real;
use crate::specfun::scaled_infeld_row;

/// Angular dependence of the effective quadratic susceptibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiVariant {
    /// `cos φ_s cos φ_i`
    Chi1,
    /// `(1 + cos² φ_i) / 2`
    Chi2,
}

impl ChiVariant {
    pub fn number(self) -> u8 {
        match self {
            ChiVariant::Chi1 => 1,
            ChiVariant::Chi2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(ChiVariant::Chi1),
            2 => Some(ChiVariant::Chi2),
            _ => None,
        }
    }
}

impl fmt::Display for ChiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi{}", self.number())
    }
}

/// Parity of a Fourier index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i64) -> Self {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Dense coupling matrix over Fourier indices `n, m ∈ [-n_max, n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    chi: ChiVariant,
    tau: T,
    n_max: usize,
    entries: DMatrix<T>,
}

impl<T: Real> CouplingMatrix<T> {
    /// Wraps a raw matrix; used by the oracles and for fault injection.
    pub fn from_entries(chi: ChiVariant, tau: T, entries: DMatrix<T>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim.is_multiple_of(2) {
            return Err(invalid(
                "entries",
                format!(
                    "expected an odd square matrix, got {}x{}",
                    dim,
                    entries.ncols()
                ),
            ));
        }
        Ok(Self {
            chi,
            tau,
            n_max: dim / 2,
            entries,
        })
    }

    pub fn chi(&self) -> ChiVariant {
        self.chi
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.entries
    }

    /// Fourier index of storage position `i`.
    pub fn index_of(&self, i: usize) -> i64 {
        i as i64 - self.n_max as i64
    }

    /// Storage position of Fourier index `n`.
    pub fn position(&self, n: i64) -> usize {
        debug_assert!(n.unsigned_abs() as usize <= self.n_max);
        (n + self.n_max as i64) as usize
    }

    pub fn get(&self, n: i64, m: i64) -> T {
        self.entries[(self.position(n), self.position(m))]
    }

    /// Storage positions of all indices with the given parity, ascending.
    pub fn positions_with(&self, parity: Parity) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| Parity::of(self.index_of(i)) == parity)
            .collect()
    }

    /// Square sub-block over the indices of one parity.
    pub fn parity_block(&self, parity: Parity) -> DMatrix<T> {
        let pos = self.positions_with(parity);
        DMatrix::from_fn(pos.len(), pos.len(), |r, c| self.entries[(pos[r], pos[c])])
    }

    /// CSV dump: header row of column indices `m`, then one row per `n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "n\\m")?;
        for j in 0..self.dim() {
            write!(out, ",{}", self.index_of(j))?;
        }
        writeln!(out)?;
        for i in 0..self.dim() {
            write!(out, "{}", self.index_of(i))?;
            for j in 0..self.dim() {
                write!(out, ",{}", real(self.entries[(i, j)].as_f64()))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Smallest `n_max ≥ 8` with `e^{-τ} I_{n_max}(τ) < eps`.
pub fn truncation_order<T: Real>(tau: T, eps: T) -> Result<usize> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let t = tau.as_f64().max(1.0);
    let mut upper = 8 + (1.5 * (2.0 * t * -eps.as_f64().ln()).sqrt()).ceil() as usize + 30;
    loop {
        let row = scaled_infeld_row(tau, upper)?;
        if let Some(n) = (8..=upper).find(|&n| row.values()[n] < eps) {
            return Ok(n);
        }
        upper *= 2;
    }
}

fn sign<T: Real>(n: i64) -> T {
    if n.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Coupling matrix for the `cos φ_s cos φ_i` susceptibility (symmetric).
pub fn build_h1<T: Real>(tau: T, n_max: usize) -> Result<CouplingMatrix<T>> {
    let row = scaled_infeld_row(tau, n_max + 1)?;
    let dim = 2 * n_max + 1;
    let half = T::lit(0.5);
    let mut h = DMatrix::zeros(dim, dim);
    let nm = n_max as i64;
    for n in -nm..=nm {
        let i = (n + nm) as usize;
        let s = sign::<T>(n) * half;
        let upper = row.at(n + 1);
        let lower = row.at(n - 1);
        h[(i, i)] = s * (upper + lower);
        if n + 2 <= nm {
            h[(i, i + 2)] = s * upper;
        }
        if n - 2 >= -nm {
            h[(i, i - 2)] = s * lower;
        }
    }
    Ok(CouplingMatrix {
        chi: ChiVariant::Chi1,
        tau,
        n_max,
        entries: h,
    })
}

/// Coupling matrix for the `(1 + cos² φ_i)/2` susceptibility (not symmetric).
pub fn build_h2<T: Real>(tau: T, n_max: usize) -> Result<CouplingMatrix<T>> {
    let row = scaled_infeld_row(tau, n_max)?;
    let dim = 2 * n_max + 1;
    let side = T::one() / T::lit(6.0);
    let mut h = DMatrix::zeros(dim, dim);
    let nm = n_max as i64;
    for n in -nm..=nm {
        let i = (n + nm) as usize;
        let s = sign::<T>(n);
        h[(i, i)] = s * row.at(n);
        if n + 2 <= nm {
            h[(i, i + 2)] = s * row.at(n + 2) * side;
        }
        if n - 2 >= -nm {
            h[(i, i - 2)] = s * row.at(n - 2) * side;
        }
    }
    Ok(CouplingMatrix {
        chi: ChiVariant::Chi2,
        tau,
        n_max,
        entries: h,
    })
}

pub fn build<T: Real>(chi: ChiVariant, tau: T, n_max: usize) -> Result<CouplingMatrix<T>> {
    match chi {
        ChiVariant::Chi1 => build_h1(tau, n_max),
        ChiVariant::Chi2 => build_h2(tau, n_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn h1_at_zero_tau_has_four_entries() {
        let h = build_h1(0.0f64, 8).unwrap();
        let nonzero: Vec<_> = (0..h.dim())
            .flat_map(|i| (0..h.dim()).map(move |j| (i, j)))
            .filter(|&(i, j)| h.entries()[(i, j)] != 0.0)
            .map(|(i, j)| (h.index_of(i), h.index_of(j)))
            .collect();
        assert_eq!(nonzero, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);
        for (n, m) in nonzero {
            assert_eq!(h.get(n, m), -0.5);
        }
    }

    #[test]
    fn h2_at_zero_tau_is_single_column() {
        let h = build_h2(0.0f64, 8).unwrap();
        assert_eq!(h.get(0, 0), 1.0);
        assert_eq!(h.get(2, 0), 1.0 / 6.0);
        assert_eq!(h.get(-2, 0), 1.0 / 6.0);
        let total: usize = h.entries().iter().filter(|v| **v != 0.0).count();
        assert_eq!(total, 3);
        let sv = h.entries().clone().singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        assert!((top - (19.0f64 / 18.0).sqrt()).abs() < 1e-14);
        assert_eq!(sv.iter().filter(|s| **s > 1e-14).count(), 1);
    }

    #[test]
    fn truncation_order_floor_and_scan() {
        assert_eq!(truncation_order(0.0f64, 1e-12).unwrap(), 8);
        let n = truncation_order(1600.0f64, 1e-12).unwrap();
        let estimate = (2.0 * 1600.0 * 1e12f64.ln()).sqrt();
        assert!((n as f64 - estimate).abs() < 0.15 * estimate, "n={n}");
        let row = scaled_infeld_row(1600.0f64, n).unwrap();
        assert!(row.values()[n] < 1e-12 && row.values()[n - 1] >= 1e-12);
        assert!(truncation_order(1.0f64, 0.0).is_err());
        assert!(truncation_order(1.0f64, 1.5).is_err());
    }

    #[test]
    fn csv_has_index_header() {
        let h = build_h1(0.5f64, 1).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n\\m,-1,0,1");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn tail_entries_are_local() {
        let tau = 40.0;
        let n = truncation_order(tau, 1e-12).unwrap();
        let wide = n + n / 4;
        for chi in [ChiVariant::Chi1, ChiVariant::Chi2] {
            let small = build(chi, tau, n).unwrap();
            let big = build(chi, tau, wide).unwrap();
            let nm = n as i64;
            for a in -nm..=nm {
                for b in -nm..=nm {
                    assert_eq!(small.get(a, b), big.get(a, b), "{chi} ({a},{b})");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn structure_invariants(tau in 0.0f64..200.0, n_max in 1usize..40, which in 0u8..2) {
            let chi = if which == 0 { ChiVariant::Chi1 } else { ChiVariant::Chi2 };
            let h = build(chi, tau, n_max).unwrap();
            let nm = n_max as i64;
            for n in -nm..=nm {
                for m in -nm..=nm {
                    let v = h.get(n, m);
                    prop_assert!(v.abs() <= 1.0);
                    let d = (n - m).abs();
                    if d != 0 && d != 2 {
                        prop_assert_eq!(v, 0.0);
                    }
                    if chi == ChiVariant::Chi1 {
                        prop_assert_eq!(v, h.get(m, n));
                    }
                }
            }
        }
    }
}
