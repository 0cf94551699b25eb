//! Frequency and gain sweeps over the full pipeline.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{build, truncation_order, ChiVariant};
use crate::decomp::{azimuthal_grid, decompose, schmidt_number, ModeDecomposition, Side};
use crate::error::{invalid, Result};
use crate::format::{csv_line, real};
use crate::physics::{
    check_validity, tau_of_frequency, DimensionlessPoint, ExperimentConfig, GainModel, HZ_PER_THZ,
};
use crate::scatter::{bogolyubov_gains, effective_mode_number, shifted_mode_curves, ShiftedCurve};

/// Truncation tolerance used for every scan point.
pub const TRUNCATION_EPS: f64 = 1e-12;

/// Decomposition of the coupling matrix at one idler frequency.
#[derive(Debug, Clone)]
pub struct FrequencyPoint {
    pub f_thz: f64,
    pub tau: f64,
    pub n_max: usize,
    pub decomposition: ModeDecomposition<f64>,
}

pub fn analyze(cfg: &ExperimentConfig, chi: ChiVariant, f_thz: f64) -> Result<FrequencyPoint> {
    check_validity(f_thz)?;
    let tau = tau_of_frequency(f_thz, cfg)?;
    let n_max = truncation_order(tau, TRUNCATION_EPS)?;
    let decomposition = decompose(&build(chi, tau, n_max)?)?;
    Ok(FrequencyPoint {
        f_thz,
        tau,
        n_max,
        decomposition,
    })
}

/// `γ̃L` at `f_thz` for a curve labelled by `label`.
///
/// With the fixed model the label is the gain itself; with the pump-scaled
/// model it is the gain at the configured reference frequency.
pub fn curve_gain(cfg: &ExperimentConfig, label: f64, f_thz: f64) -> f64 {
    match cfg.gain_model {
        GainModel::Fixed => label,
        GainModel::PumpScaled => label * f_thz * HZ_PER_THZ / cfg.gain_ref_frequency,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScanRow {
    pub f_thz: f64,
    /// Curve label, see [`curve_gain`].
    #[serde(rename = "gainLG")]
    pub gain_lg: f64,
    pub tau: f64,
    pub n_max: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "schmidt_K")]
    pub schmidt_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScanResult {
    pub chi: ChiVariant,
    pub gain_model: GainModel,
    /// Sorted by `(gainLG, f_THz)`.
    pub rows: Vec<KScanRow>,
}

impl KScanResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "f_THz,gainLG,tau,n_max,K,schmidt_K")?;
        for r in &self.rows {
            let cells = [
                real(r.f_thz),
                real(r.gain_lg),
                real(r.tau),
                r.n_max.to_string(),
                real(r.k),
                real(r.schmidt_k),
            ];
            writeln!(out, "{}", csv_line(cells))?;
        }
        Ok(())
    }

    /// Rows of one curve, ascending in frequency.
    pub fn curve(&self, label: f64) -> Vec<KScanRow> {
        self.rows
            .iter()
            .filter(|r| r.gain_lg == label)
            .copied()
            .collect()
    }
}

/// `K` and the Schmidt number over a frequency × gain grid.
pub fn scan_k(
    cfg: &ExperimentConfig,
    chi: ChiVariant,
    frequencies: &[f64],
    gains: &[f64],
) -> Result<KScanResult> {
    cfg.validate()?;
    for &f in frequencies {
        check_validity(f)?;
    }
    for &g in gains {
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid(
                "gainLG",
                format!("scan gains must be positive, got {g}"),
            ));
        }
    }
    let per_frequency: Vec<Vec<KScanRow>> = frequencies
        .par_iter()
        .map(|&f| {
            let point = analyze(cfg, chi, f)?;
            let schmidt_k = schmidt_number(&point.decomposition)?;
            gains
                .iter()
                .map(|&label| {
                    let spectrum =
                        bogolyubov_gains(&point.decomposition, curve_gain(cfg, label, f))?;
                    Ok(KScanRow {
                        f_thz: f,
                        gain_lg: label,
                        tau: point.tau,
                        n_max: point.n_max,
                        k: effective_mode_number(&spectrum)?,
                        schmidt_k,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<KScanRow> = per_frequency.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.gain_lg
            .total_cmp(&b.gain_lg)
            .then(a.f_thz.total_cmp(&b.f_thz))
    });
    Ok(KScanResult {
        chi,
        gain_model: cfg.gain_model,
        rows,
    })
}

/// `n` evenly spaced frequencies from `lo` to `hi` inclusive.
pub fn frequency_steps(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("steps", "must be at least 1".to_string()));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect())
}

/// Least-squares line `y = a + b x`; returns `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (intercept, slope, r2)
}

/// Eigenvalue table and shifted mode curves at one frequency.
#[derive(Debug, Clone)]
pub struct ModeGallery {
    pub point: DimensionlessPoint,
    pub n_max: usize,
    pub decomposition: ModeDecomposition<f64>,
    pub phi: Vec<f64>,
    pub idler: Vec<ShiftedCurve<f64>>,
    pub signal: Vec<ShiftedCurve<f64>>,
}

pub fn mode_gallery(
    cfg: &ExperimentConfig,
    chi: ChiVariant,
    f_thz: f64,
    modes: usize,
    n: usize,
) -> Result<ModeGallery> {
    cfg.validate()?;
    let point = analyze(cfg, chi, f_thz)?;
    let dec = point.decomposition;
    Ok(ModeGallery {
        point: DimensionlessPoint {
            f_thz,
            tau: point.tau,
            gain_lg: curve_gain(cfg, cfg.gain_ref, f_thz),
        },
        n_max: point.n_max,
        phi: azimuthal_grid(n),
        idler: shifted_mode_curves(&dec, Side::Idler, n, modes)?,
        signal: shifted_mode_curves(&dec, Side::Signal, n, modes)?,
        decomposition: dec,
    })
}
