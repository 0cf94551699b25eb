//! Signed orthogonal decomposition `H = Σ_j R_j w_j v_jᵀ` and synthesis of the
//! azimuthal mode functions.
//!
//! Each parity block is decomposed on its own, so every mode is supported on
//! either even or odd Fourier indices. The symmetric variant uses a symmetric
//! eigensolver (`w_j = v_j`, `R_j` the signed eigenvalue); the general variant
//! uses an SVD and moves the sign of the overlap `w_j·v_j` into `R_j`.
//!
//! Conventions, all chosen so that output files are reproducible:
//! - `w_j` is flipped so that its largest-magnitude coefficient is positive
//!   (lowest Fourier index wins ties), `v_j` follows it;
//! - modes are sorted by `|R_j|` descending, then even parity first, then by
//!   the Fourier index of the dominant coefficient.

use std::cmp::Ordering;
use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coupling::{ChiVariant, CouplingMatrix, Parity};
use crate::error::{Error, Result};
use crate::format::{csv_line, real};
use crate::scalar::Real;

/// Overlaps below this leave the sign of `R_j` undetermined.
const OVERLAP_FLOOR: f64 = 1e-12;

/// Which field a mode function describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Idler,
    Signal,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Idler => "idler",
            Side::Signal => "signal",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ModeDecomposition<T: Real> {
    chi: ChiVariant,
    tau: T,
    n_max: usize,
    values: Vec<T>,
    /// Row `j` holds the idler coefficients `w_j` over Fourier positions.
    left: DMatrix<T>,
    /// Row `j` holds the signal coefficients `v_j`.
    right: DMatrix<T>,
    parity: Vec<Parity>,
    unresolved: Vec<usize>,
}

impl<T: Real> ModeDecomposition<T> {
    pub fn chi(&self) -> ChiVariant {
        self.chi
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Signed `R_j`, ordered by decreasing magnitude.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn left(&self) -> &DMatrix<T> {
        &self.left
    }

    pub fn right(&self) -> &DMatrix<T> {
        &self.right
    }

    pub fn coefficients(&self, side: Side) -> &DMatrix<T> {
        match side {
            Side::Idler => &self.left,
            Side::Signal => &self.right,
        }
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    /// Modes whose overlap was too small to fix the sign of `R_j`.
    pub fn unresolved_signs(&self) -> &[usize] {
        &self.unresolved
    }

    pub fn index_of(&self, position: usize) -> i64 {
        position as i64 - self.n_max as i64
    }

    /// `|R_j|` of one parity block, descending.
    pub fn block_magnitudes(&self, parity: Parity) -> Vec<T> {
        self.values
            .iter()
            .zip(&self.parity)
            .filter(|(_, p)| **p == parity)
            .map(|(r, _)| r.abs())
            .collect()
    }

    /// `Σ_j R_j w_jᵀ v_j` over Fourier positions.
    pub fn reconstruct(&self) -> DMatrix<T> {
        let scaled = DMatrix::from_fn(self.len(), self.left.ncols(), |j, c| {
            self.values[j] * self.left[(j, c)]
        });
        scaled.transpose() * &self.right
    }

    /// One row per mode: `j,R,parity`.
    pub fn write_table_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "j,R,parity")?;
        for (j, (r, p)) in self.values.iter().zip(&self.parity).enumerate() {
            writeln!(out, "{j},{},{p}", real(r.as_f64()))?;
        }
        Ok(())
    }

    /// Coefficient matrix of one side: header of Fourier indices, one row per mode.
    pub fn write_coefficients_csv<W: Write>(&self, side: Side, mut out: W) -> io::Result<()> {
        let coeffs = self.coefficients(side);
        let header = std::iter::once("j".to_string())
            .chain((0..coeffs.ncols()).map(|c| format!("n{}", self.index_of(c))));
        writeln!(out, "{}", csv_line(header))?;
        for j in 0..coeffs.nrows() {
            let row = std::iter::once(j.to_string())
                .chain((0..coeffs.ncols()).map(|c| real(coeffs[(j, c)].as_f64())));
            writeln!(out, "{}", csv_line(row))?;
        }
        Ok(())
    }
}

struct Candidate<T> {
    value: T,
    parity: Parity,
    dominant: i64,
    left: Vec<T>,
    right: Vec<T>,
    unresolved: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Position of the largest-magnitude entry, earliest position on ties.
fn dominant_position<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

fn block_candidates<T: Real>(h: &CouplingMatrix<T>, parity: Parity, out: &mut Vec<Candidate<T>>) {
    let pos = h.positions_with(parity);
    if pos.is_empty() {
        return;
    }
    let block = h.parity_block(parity);
    let size = pos.len();

    let mut raw: Vec<(T, Vec<T>, Vec<T>, bool)> = Vec::with_capacity(size);
    match h.chi() {
        ChiVariant::Chi1 => {
            let eig = SymmetricEigen::new(block);
            for k in 0..size {
                let vec: Vec<T> = eig.eigenvectors.column(k).iter().copied().collect();
                raw.push((eig.eigenvalues[k], vec.clone(), vec, false));
            }
        }
        ChiVariant::Chi2 => {
            let svd = SVD::new(block, true, true);
            let u = svd.u.expect("left singular vectors requested");
            let v_t = svd.v_t.expect("right singular vectors requested");
            for k in 0..size {
                let w: Vec<T> = u.column(k).iter().copied().collect();
                let mut v: Vec<T> = v_t.row(k).iter().copied().collect();
                let overlap = dot(&w, &v);
                let (s, unresolved) = if overlap.abs() < T::lit(OVERLAP_FLOOR) {
                    (T::one(), true)
                } else if overlap > T::zero() {
                    (T::one(), false)
                } else {
                    (-T::one(), false)
                };
                for x in &mut v {
                    *x *= s;
                }
                raw.push((svd.singular_values[k] * s, w, v, unresolved));
            }
        }
    }

    let dim = h.dim();
    for (value, mut w, mut v, unresolved) in raw {
        let top = dominant_position(&w);
        if w[top] < T::zero() {
            w.iter_mut().for_each(|x| *x = -*x);
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let mut left = vec![T::zero(); dim];
        let mut right = vec![T::zero(); dim];
        for (k, &p) in pos.iter().enumerate() {
            left[p] = w[k];
            right[p] = v[k];
        }
        out.push(Candidate {
            value,
            parity,
            dominant: h.index_of(pos[top]),
            left,
            right,
            unresolved,
        });
    }
}

/// Decomposes a coupling matrix into signed modes; see the module docs.
pub fn decompose<T: Real>(h: &CouplingMatrix<T>) -> Result<ModeDecomposition<T>> {
    let dim = h.dim();
    for c in 0..dim {
        for r in 0..dim {
            if !h.entries()[(r, c)].is_finite() {
                return Err(Error::NonFinite {
                    row: h.index_of(r),
                    col: h.index_of(c),
                });
            }
        }
    }

    let mut modes = Vec::with_capacity(dim);
    block_candidates(h, Parity::Even, &mut modes);
    block_candidates(h, Parity::Odd, &mut modes);

    modes.sort_by(|a, b| {
        b.value
            .abs()
            .partial_cmp(&a.value.abs())
            .unwrap_or(Ordering::Equal)
            .then(a.parity.cmp(&b.parity))
            .then(a.dominant.cmp(&b.dominant))
    });

    let count = modes.len();
    let mut left = DMatrix::zeros(count, dim);
    let mut right = DMatrix::zeros(count, dim);
    let mut values = Vec::with_capacity(count);
    let mut parity = Vec::with_capacity(count);
    let mut unresolved = Vec::new();
    for (j, m) in modes.into_iter().enumerate() {
        for c in 0..dim {
            left[(j, c)] = m.left[c];
            right[(j, c)] = m.right[c];
        }
        values.push(m.value);
        parity.push(m.parity);
        if m.unresolved {
            unresolved.push(j);
        }
    }

    Ok(ModeDecomposition {
        chi: h.chi(),
        tau: h.tau(),
        n_max: h.n_max(),
        values,
        left,
        right,
        parity,
        unresolved,
    })
}

/// Schmidt number `(Σ R²)² / Σ R⁴` of the decomposition.
pub fn schmidt_number<T: Real>(dec: &ModeDecomposition<T>) -> Result<T> {
    participation(dec.values().iter().map(|r| *r * *r))
}

/// `(Σ w)² / Σ w²` for nonnegative weights.
pub(crate) fn participation<T: Real>(weights: impl Iterator<Item = T>) -> Result<T> {
    let (sum, sum_sq) = weights.fold((T::zero(), T::zero()), |(s, q), w| (s + w, q + w * w));
    if sum_sq == T::zero() {
        return Err(Error::ZeroSpectrum);
    }
    Ok(sum * sum / sum_sq)
}

/// Uniform grid `φ_k = -π + 2πk/N` over `[-π, π)`.
pub fn azimuthal_grid<T: Real>(n: usize) -> Vec<T> {
    let step = T::two_pi() / T::from_count(n);
    (0..n).map(|k| -T::pi() + step * T::from_count(k)).collect()
}

/// Smallest grid that resolves a band of Fourier indices up to `n_max`.
pub fn min_grid(n_max: usize) -> usize {
    (4 * n_max).max(4)
}

pub(crate) fn check_grid(n_max: usize, n: usize) -> Result<()> {
    let min = min_grid(n_max);
    if n < min {
        return Err(Error::GridTooSmall { n, min });
    }
    Ok(())
}

/// Sampled mode functions `Σ_n c_{jn} e^{±inφ} / √(2π)` for a range of modes.
///
/// Idler modes use `e^{+inφ}`; signal modes carry the flipped index of the
/// `a_{-m}` pairing and use `e^{-imφ}`. Returns real and imaginary parts as
/// `modes × N` matrices.
pub fn synthesize<T: Real>(
    dec: &ModeDecomposition<T>,
    side: Side,
    modes: std::ops::Range<usize>,
    n: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    check_grid(dec.n_max(), n)?;
    if modes.end > dec.len() {
        return Err(Error::ModeIndex {
            index: modes.end.saturating_sub(1),
            count: dec.len(),
        });
    }
    let phi = azimuthal_grid::<T>(n);
    let dim = 2 * dec.n_max() + 1;
    let norm = T::one() / T::two_pi().sqrt();
    let direction = match side {
        Side::Idler => T::one(),
        Side::Signal => -T::one(),
    };
    let mut cos_t = DMatrix::zeros(dim, n);
    let mut sin_t = DMatrix::zeros(dim, n);
    for c in 0..dim {
        let idx = T::from_index(dec.index_of(c));
        for (k, &p) in phi.iter().enumerate() {
            let angle = idx * p;
            cos_t[(c, k)] = angle.cos() * norm;
            sin_t[(c, k)] = angle.sin() * norm * direction;
        }
    }
    let coeffs = dec
        .coefficients(side)
        .rows(modes.start, modes.len())
        .into_owned();
    Ok((&coeffs * cos_t, &coeffs * sin_t))
}

/// Samples of one mode function on the uniform grid.
#[derive(Debug, Clone)]
pub struct ModeFunction<T: Real> {
    pub index: usize,
    pub side: Side,
    pub phi: Vec<T>,
    pub samples: Vec<Complex<T>>,
}

impl<T: Real> ModeFunction<T> {
    /// `|U_j(φ)|²` at each sample.
    pub fn intensity(&self) -> Vec<T> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `Σ |U(φ_k)|² · 2π/N`.
    pub fn quadrature_norm(&self) -> T {
        let w = T::two_pi() / T::from_count(self.samples.len());
        self.samples
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            * w
    }
}

pub fn mode_function<T: Real>(
    dec: &ModeDecomposition<T>,
    j: usize,
    side: Side,
    n: usize,
) -> Result<ModeFunction<T>> {
    if j >= dec.len() {
        return Err(Error::ModeIndex {
            index: j,
            count: dec.len(),
        });
    }
    let (re, im) = synthesize(dec, side, j..j + 1, n)?;
    Ok(ModeFunction {
        index: j,
        side,
        phi: azimuthal_grid(n),
        samples: (0..n)
            .map(|k| Complex::new(re[(0, k)], im[(0, k)]))
            .collect(),
    })
}
