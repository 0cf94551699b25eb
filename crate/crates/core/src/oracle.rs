//! Brute-force reference computations that share no code path with the
//! analytic pipeline: direct Bessel series and quadrature, a dense sampled
//! interaction kernel, and propagation of the coupled Heisenberg equations
//! by matrix exponential.
//!
//! Everything here is `f64` only; these routines are meant to be slow and
//! obviously correct.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::coupling::{truncation_order, ChiVariant, CouplingMatrix};
use crate::error::{invalid, Error, Result};

/// Largest band the propagation oracle accepts.
pub const MOMENT_ORACLE_MAX_N: usize = 64;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(
            "tau",
            format!("must be finite and nonnegative, got {tau}"),
        ));
    }
    Ok(())
}

/// `e^{-τ} I_n(τ)` from the power series `Σ_k (τ/2)^{2k+n} / (k!(k+n)!)`,
/// summed with running rescaling so that large arguments do not overflow.
pub fn infeld_series(n: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let half = tau / 2.0;
    // log of the k = 0 term
    let mut log_lead = -tau;
    for k in 1..=n {
        log_lead += (half / k as f64).ln();
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    let mut k = 1usize;
    loop {
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            log_scale += 250.0 * 10f64.ln();
        }
        if k as f64 > half && term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    Ok((log_lead + log_scale + sum.ln()).exp())
}

/// `e^{-τ} (1/π) ∫₀^π e^{τ cos ψ} cos(nψ) dψ` by the trapezoidal rule.
///
/// The integrand is smooth and periodic, so the rule converges
/// geometrically; the node count keeps the aliased terms far below 1e-13.
pub fn infeld_quadrature(n: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let m = n + (10.0 * tau.sqrt()).ceil() as usize + 40;
    let h = PI / m as f64;
    let f = |k: usize| {
        let psi = h * k as f64;
        let s = (psi / 2.0).sin();
        (-2.0 * tau * s * s).exp() * (n as f64 * psi).cos()
    };
    let mut sum = 0.5 * (f(0) + f(m));
    for k in 1..m {
        sum += f(k);
    }
    Ok(sum * h / PI)
}

/// Angular factor of the susceptibility.
pub fn chi_value(chi: ChiVariant, phi_s: f64, phi_i: f64) -> f64 {
    match chi {
        ChiVariant::Chi1 => phi_s.cos() * phi_i.cos(),
        ChiVariant::Chi2 => (1.0 + phi_i.cos().powi(2)) / 2.0,
    }
}

/// Constant relating the angular kernel to the normalization of the
/// coupling matrices: `H_nm = c · (1/2π) ∫∫ χ e^{i n φ_i − i m φ_s − τ(1 + cos(φ_i − φ_s))}`.
pub fn kernel_normalization(chi: ChiVariant) -> f64 {
    match chi {
        ChiVariant::Chi1 => -1.0 / PI,
        ChiVariant::Chi2 => 2.0 / (3.0 * PI),
    }
}

/// Continuous interaction kernel `c·χ(φ_s, φ_i)·e^{-τ(1 + cos(φ_i − φ_s))}`.
pub fn kernel_value(chi: ChiVariant, tau: f64, phi_i: f64, phi_s: f64) -> f64 {
    let s = ((phi_i - phi_s) / 2.0).cos();
    // 1 + cos x = 2 cos²(x/2)
    kernel_normalization(chi) * chi_value(chi, phi_s, phi_i) * (-2.0 * tau * s * s).exp()
}

fn grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|k| -PI + step * k as f64).collect()
}

/// Interaction kernel sampled on an `N × N` grid (rows idler angle, columns
/// signal angle) with the quadrature weight `2π/N` split as `√(2π/N)` per side.
#[derive(Debug, Clone)]
pub struct GridKernel {
    pub chi: ChiVariant,
    pub tau: f64,
    pub phi: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl GridKernel {
    pub fn new(chi: ChiVariant, tau: f64, n: usize) -> Result<Self> {
        check_tau(tau)?;
        if n < 4 {
            return Err(Error::GridTooSmall { n, min: 4 });
        }
        let phi = grid(n);
        let w = 2.0 * PI / n as f64;
        let matrix = DMatrix::from_fn(n, n, |a, b| w * kernel_value(chi, tau, phi[a], phi[b]));
        Ok(Self {
            chi,
            tau,
            phi,
            matrix,
        })
    }

    pub fn size(&self) -> usize {
        self.phi.len()
    }
}

/// Singular values and leading singular vectors of the sampled kernel.
#[derive(Debug, Clone)]
pub struct KernelSvd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Columns are the idler-side singular vectors, `≈ √(2π/N) U_j(φ_k)`.
    pub idler_modes: DMatrix<f64>,
    pub phi: Vec<f64>,
}

/// Smallest grid the kernel oracle accepts at this `τ`.
pub fn kernel_min_grid(tau: f64) -> Result<usize> {
    Ok(4 * truncation_order(tau, 1e-12)?)
}

fn check_kernel_grid(tau: f64, n: usize) -> Result<()> {
    let min = kernel_min_grid(tau)?;
    if n < min {
        return Err(Error::GridTooSmall { n, min });
    }
    Ok(())
}

pub fn kernel_svd(chi: ChiVariant, tau: f64, n: usize) -> Result<KernelSvd> {
    check_kernel_grid(tau, n)?;
    let k = GridKernel::new(chi, tau, n)?;
    let svd = SVD::new(k.matrix, true, false);
    Ok(KernelSvd {
        singular_values: svd.singular_values.iter().copied().collect(),
        idler_modes: svd.u.expect("left singular vectors requested"),
        phi: k.phi,
    })
}

/// Singular values only, descending.
pub fn kernel_singular_values(chi: ChiVariant, tau: f64, n: usize) -> Result<Vec<f64>> {
    check_kernel_grid(tau, n)?;
    let k = GridKernel::new(chi, tau, n)?;
    let mut sv: Vec<f64> = k.matrix.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Fourier projection of the sampled kernel onto `n, m ∈ [-n_max, n_max]`,
/// laid out like a coupling matrix.
pub fn kernel_fourier_matrix(
    chi: ChiVariant,
    tau: f64,
    n_max: usize,
    n: usize,
) -> Result<DMatrix<f64>> {
    let min = (4 * n_max).max(kernel_min_grid(tau)?);
    if n < min {
        return Err(Error::GridTooSmall { n, min });
    }
    let k = GridKernel::new(chi, tau, n)?;
    let dim = 2 * n_max + 1;
    let w = 2.0 * PI / n as f64;
    // matrix already carries one factor w; the remaining one and 1/2π go here.
    let scale = w / (2.0 * PI);
    let idx = |c: usize| c as f64 - n_max as f64;
    let left = DMatrix::from_fn(dim, n, |c, a| Complex64::from_polar(1.0, idx(c) * k.phi[a]));
    let right = DMatrix::from_fn(n, dim, |b, c| {
        Complex64::from_polar(scale, -idx(c) * k.phi[b])
    });
    let kernel = k.matrix.map(|x| Complex64::new(x, 0.0));
    let projected = left * kernel * right;
    Ok(projected.map(|z| z.re))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `exp(A)` by scaling and squaring with a Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled / k as f64;
        result += &term;
        if max_abs(&term) <= 1e-18 * max_abs(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Vacuum-input second moments of the output Fourier modes.
#[derive(Debug, Clone)]
pub struct MomentMatrices {
    /// `⟨a_n⁺ a_n'⟩` for the idler, rows and columns over `[-n_max, n_max]`.
    pub idler: DMatrix<f64>,
    /// Signal moments indexed by the coupling-matrix column label.
    pub signal: DMatrix<f64>,
}

/// Integrates the linear equations `d a⁺/dz = γ̃ H b`, `d b/dz = γ̃ Hᵀ a⁺`
/// over the crystal by exponentiating the generator.
///
/// `a⁺` are idler creation operators and `b` signal annihilation operators
/// with their phase chosen to make the equations real.
pub fn propagate_moments(h: &CouplingMatrix<f64>, gain_lg: f64) -> Result<MomentMatrices> {
    if h.n_max() > MOMENT_ORACLE_MAX_N {
        return Err(invalid(
            "n_max",
            format!(
                "moment oracle is limited to n_max ≤ {MOMENT_ORACLE_MAX_N}, got {}",
                h.n_max()
            ),
        ));
    }
    if !(gain_lg.is_finite() && gain_lg >= 0.0) {
        return Err(invalid(
            "gainLG",
            format!("must be finite and nonnegative, got {gain_lg}"),
        ));
    }
    let dim = h.dim();
    let entries = h.entries();
    if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: h.index_of(pos % dim),
            col: h.index_of(pos / dim),
        });
    }
    let mut generator = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    generator
        .view_mut((0, dim), (dim, dim))
        .copy_from(&(entries * gain_lg));
    generator
        .view_mut((dim, 0), (dim, dim))
        .copy_from(&(entries.transpose() * gain_lg));
    let e = expm(&generator);
    let e12 = e.view((0, dim), (dim, dim)).into_owned();
    let e21 = e.view((dim, 0), (dim, dim)).into_owned();
    Ok(MomentMatrices {
        idler: &e12 * e12.transpose(),
        signal: &e21 * e21.transpose(),
    })
}

/// First-order idler intensity `(γ̃L)² ∫ |K(φ, φ_s)|² dφ_s` on an `N`-point grid.
pub fn perturbative_intensity(
    chi: ChiVariant,
    tau: f64,
    gain_lg: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_kernel_grid(tau, n)?;
    let phi = grid(n);
    let w = 2.0 * PI / n as f64;
    Ok(phi
        .iter()
        .map(|&pi| {
            let s: f64 = phi
                .iter()
                .map(|&ps| kernel_value(chi, tau, pi, ps).powi(2))
                .sum();
            gain_lg * gain_lg * w * s
        })
        .collect())
}
