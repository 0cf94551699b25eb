//! Bogolyubov solution in the eigenmode basis and the observables built on it.
//!
//! Mode `j` evolves as a two-mode squeezer with parameter `g_j = γ̃L·R_j`:
//! `b_j⁺(L) = b_j⁺ cosh g_j − i c_j sinh g_j`, and symmetrically for the
//! signal. Only `sinh²`/`cosh²` enter the observables, so the sign convention
//! of `R_j` never reaches a result.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::decomp::{
    azimuthal_grid, check_grid, participation, synthesize, ModeDecomposition, Side,
};
use crate::error::{invalid, Error, Result};
use crate::format::{csv_line, real};
use crate::scalar::Real;

/// Per-mode squeezing parameters, aligned with the decomposition order.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSpectrum<T> {
    g: Vec<T>,
    gain_lg: T,
}

impl<T: Real> GainSpectrum<T> {
    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn gain_lg(&self) -> T {
        self.gain_lg
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Mean photon number per mode, `sinh² g_j`.
    pub fn occupations(&self) -> Vec<T> {
        self.g.iter().map(|g| g.sinh().powi(2)).collect()
    }

    /// `Σ_j sinh² g_j`, identical on the idler and signal side.
    pub fn total_photons(&self) -> T {
        self.occupations().into_iter().fold(T::zero(), |a, x| a + x)
    }

    /// `max_j |cosh² g_j − sinh² g_j − 1|`.
    pub fn bogolyubov_residual(&self) -> T {
        self.g.iter().fold(T::zero(), |acc, g| {
            let r = (g.cosh().powi(2) - g.sinh().powi(2) - T::one()).abs();
            acc.max(r)
        })
    }
}

pub fn bogolyubov_gains<T: Real>(
    dec: &ModeDecomposition<T>,
    gain_lg: T,
) -> Result<GainSpectrum<T>> {
    if !gain_lg.is_finite() || gain_lg < T::zero() {
        return Err(invalid(
            "gainLG",
            format!("must be finite and nonnegative, got {gain_lg}"),
        ));
    }
    Ok(GainSpectrum {
        g: dec.values().iter().map(|r| *r * gain_lg).collect(),
        gain_lg,
    })
}

fn check_aligned<T: Real>(dec: &ModeDecomposition<T>, gains: &GainSpectrum<T>) -> Result<()> {
    if dec.len() != gains.len() {
        return Err(Error::Misaligned {
            gains: gains.len(),
            modes: dec.len(),
        });
    }
    Ok(())
}

/// Effective number of modes `(Σ sinh² g)² / Σ sinh⁴ g`.
pub fn effective_mode_number<T: Real>(gains: &GainSpectrum<T>) -> Result<T> {
    let occupations = gains.occupations();
    if occupations.iter().any(|x| !(x.powi(2)).is_finite()) {
        return Err(invalid(
            "gainLG",
            format!("{} overflows the mode occupations", gains.gain_lg),
        ));
    }
    participation(occupations.into_iter())
}

/// Sampled far-field intensity `Σ_j sinh² g_j |U_j(φ)|²`.
#[derive(Debug, Clone)]
pub struct AngularIntensity<T> {
    pub side: Side,
    pub phi: Vec<T>,
    pub total: Vec<T>,
    /// `sinh² g_j |U_j(φ)|²` for the leading modes, when requested.
    pub per_mode: Option<Vec<Vec<T>>>,
}

impl<T: Real> AngularIntensity<T> {
    /// Quadrature integral `Σ_k total(φ_k) · 2π/N`.
    pub fn integral(&self) -> T {
        let w = T::two_pi() / T::from_count(self.phi.len());
        self.total.iter().fold(T::zero(), |a, x| a + *x) * w
    }

    /// Columns `phi_rad,total,mode_0..mode_{J-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let modes = self.per_mode.as_ref().map_or(0, |m| m.len());
        let header = ["phi_rad".to_string(), "total".to_string()]
            .into_iter()
            .chain((0..modes).map(|j| format!("mode_{j}")));
        writeln!(out, "{}", csv_line(header))?;
        for k in 0..self.phi.len() {
            let mut cells = vec![real(self.phi[k].as_f64()), real(self.total[k].as_f64())];
            if let Some(per) = &self.per_mode {
                cells.extend(per.iter().map(|m| real(m[k].as_f64())));
            }
            writeln!(out, "{}", csv_line(cells))?;
        }
        Ok(())
    }
}

/// Intensity profile on an `n`-point grid; keeps `keep_modes` per-mode components.
pub fn intensity<T: Real>(
    dec: &ModeDecomposition<T>,
    gains: &GainSpectrum<T>,
    side: Side,
    n: usize,
    keep_modes: usize,
) -> Result<AngularIntensity<T>> {
    check_aligned(dec, gains)?;
    if keep_modes > dec.len() {
        return Err(Error::ModeIndex {
            index: keep_modes - 1,
            count: dec.len(),
        });
    }
    let (re, im) = synthesize(dec, side, 0..dec.len(), n)?;
    let weights = gains.occupations();
    let mut total = vec![T::zero(); n];
    let mut per_mode = Vec::with_capacity(keep_modes);
    for (j, &w) in weights.iter().enumerate() {
        let component: Vec<T> = (0..n)
            .map(|k| w * (re[(j, k)] * re[(j, k)] + im[(j, k)] * im[(j, k)]))
            .collect();
        for (t, c) in total.iter_mut().zip(&component) {
            *t += *c;
        }
        if j < keep_modes {
            per_mode.push(component);
        }
    }
    Ok(AngularIntensity {
        side,
        phi: azimuthal_grid(n),
        total,
        per_mode: (keep_modes > 0).then_some(per_mode),
    })
}

/// Mode intensity drawn around its eigenvalue level: `R_j (1 + 2π|R_j||U_j(φ)|²)`.
#[derive(Debug, Clone)]
pub struct ShiftedCurve<T> {
    pub index: usize,
    pub value: T,
    pub samples: Vec<T>,
}

pub fn shifted_mode_curves<T: Real>(
    dec: &ModeDecomposition<T>,
    side: Side,
    n: usize,
    count: usize,
) -> Result<Vec<ShiftedCurve<T>>> {
    if count > dec.len() {
        return Err(Error::ModeIndex {
            index: count.saturating_sub(1),
            count: dec.len(),
        });
    }
    let (re, im) = synthesize(dec, side, 0..count, n)?;
    let two_pi = T::two_pi();
    Ok((0..count)
        .map(|j| {
            let r = dec.values()[j];
            let samples = (0..n)
                .map(|k| {
                    let u2 = re[(j, k)] * re[(j, k)] + im[(j, k)] * im[(j, k)];
                    r * (T::one() + two_pi * r.abs() * u2)
                })
                .collect();
            ShiftedCurve {
                index: j,
                value: r,
                samples,
            }
        })
        .collect())
}

/// Columns `phi_rad,curve_0..curve_{J-1}`.
pub fn write_curves_csv<T: Real, W: Write>(
    phi: &[T],
    curves: &[ShiftedCurve<T>],
    mut out: W,
) -> io::Result<()> {
    let header = std::iter::once("phi_rad".to_string())
        .chain(curves.iter().map(|c| format!("curve_{}", c.index)));
    writeln!(out, "{}", csv_line(header))?;
    for (k, p) in phi.iter().enumerate() {
        let cells = std::iter::once(real(p.as_f64()))
            .chain(curves.iter().map(|c| real(c.samples[k].as_f64())));
        writeln!(out, "{}", csv_line(cells))?;
    }
    Ok(())
}

/// Plane-wave scattering matrix sampled on an azimuthal grid.
///
/// `idler_idler[a][b]` is the kernel multiplying `a_i⁺(φ_b)` in `a_i⁺(φ_a, L)`;
/// `idler_signal` multiplies `a_s(φ_b)`. The signal-out blocks are analogous.
/// Diagonal blocks contain the identity kernel `δ_ab / w` (with `w = 2π/N`)
/// for the modes outside the truncated band, so vacuum scattering is exactly
/// the identity.
#[derive(Debug, Clone)]
pub struct ScatteringKernels<T: Real> {
    pub phi: Vec<T>,
    pub n_max: usize,
    pub idler_idler: DMatrix<Complex<T>>,
    pub idler_signal: DMatrix<Complex<T>>,
    pub signal_signal: DMatrix<Complex<T>>,
    pub signal_idler: DMatrix<Complex<T>>,
}

fn complex_modes<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(re.nrows(), re.ncols(), |j, k| {
        Complex::new(re[(j, k)], im[(j, k)])
    })
}

pub fn scattering_kernels<T: Real>(
    dec: &ModeDecomposition<T>,
    gains: &GainSpectrum<T>,
    n: usize,
) -> Result<ScatteringKernels<T>> {
    check_aligned(dec, gains)?;
    check_grid(dec.n_max(), n)?;
    let modes = dec.len();
    let (ur, ui) = synthesize(dec, Side::Idler, 0..modes, n)?;
    let (sr, si) = synthesize(dec, Side::Signal, 0..modes, n)?;
    let u = complex_modes(&ur, &ui); // modes × N
    let s = complex_modes(&sr, &si);

    let minus_i = Complex::new(T::zero(), -T::one());
    let cosh_m1: Vec<T> = gains.g().iter().map(|g| g.cosh() - T::one()).collect();
    let sinh: Vec<T> = gains.g().iter().map(|g| g.sinh()).collect();
    let scale_rows = |m: &DMatrix<Complex<T>>, f: &[T], phase: Complex<T>| {
        DMatrix::from_fn(m.nrows(), m.ncols(), |j, k| m[(j, k)] * phase * f[j])
    };
    let one = Complex::new(T::one(), T::zero());
    let inv_w = Complex::new(T::from_count(n) / T::two_pi(), T::zero());
    let identity = DMatrix::from_diagonal_element(n, n, inv_w);

    // Σ_j f_j X_j(a) Y_j(b) = Xᵀ diag(f) Y
    let idler_idler = &identity + u.transpose() * scale_rows(&u.conjugate(), &cosh_m1, one);
    let signal_signal = &identity + s.transpose() * scale_rows(&s.conjugate(), &cosh_m1, one);
    let idler_signal = u.transpose() * scale_rows(&s, &sinh, minus_i);
    let signal_idler = s.transpose() * scale_rows(&u, &sinh, minus_i);

    Ok(ScatteringKernels {
        phi: azimuthal_grid(n),
        n_max: dec.n_max(),
        idler_idler,
        idler_signal,
        signal_signal,
        signal_idler,
    })
}

impl<T: Real> ScatteringKernels<T> {
    pub fn grid_size(&self) -> usize {
        self.phi.len()
    }

    fn weight(&self) -> T {
        T::two_pi() / T::from_count(self.grid_size())
    }

    /// `max |A Aᴴ − B Bᴴ − 1|` over both output fields, with the kernels
    /// weighted by the quadrature step.
    pub fn quasi_unitarity_residual(&self) -> T {
        let w = Complex::new(self.weight(), T::zero());
        let eye = DMatrix::<Complex<T>>::identity(self.grid_size(), self.grid_size());
        let one_side = |a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>| {
            let a = a * w;
            let b = b * w;
            let r = &a * a.adjoint() - &b * b.adjoint() - &eye;
            r.iter().fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()))
        };
        one_side(&self.idler_idler, &self.idler_signal)
            .max(one_side(&self.signal_signal, &self.signal_idler))
    }

    /// Vacuum-input second moments `⟨a_n⁺ a_n'⟩` of the output field in the
    /// Fourier basis, `n, n' ∈ [-n_max, n_max]`.
    ///
    /// Idler moments are indexed by the idler Fourier index; signal moments by
    /// the coupling-matrix column label `m`, i.e. the operator `a_{-m}`.
    pub fn fourier_second_moments(&self, side: Side) -> DMatrix<Complex<T>> {
        let n = self.grid_size();
        let dim = 2 * self.n_max + 1;
        let w = self.weight();
        let norm = w / T::two_pi().sqrt();
        let (cross, direction) = match side {
            Side::Idler => (&self.idler_signal, -T::one()),
            Side::Signal => (&self.signal_idler, T::one()),
        };
        // projection[c][a] = w e^{∓ i n φ_a} / √(2π)
        let projection = DMatrix::from_fn(dim, n, |c, a| {
            let idx = T::from_index(c as i64 - self.n_max as i64);
            let angle = direction * idx * self.phi[a];
            Complex::new(angle.cos() * norm, angle.sin() * norm)
        });
        let m = projection * cross;
        (&m * m.adjoint()) * Complex::new(w, T::zero())
    }
}
