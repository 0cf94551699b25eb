//! Exponentially scaled modified Bessel functions of the first kind,
//! `e^{-τ} I_n(τ)`, for integer order.
//!
//! The unscaled `I_n` overflows double precision near `τ ≈ 700`, while the
//! geometry parameter reaches a few thousand, so only the scaled quantity is
//! ever formed. Rows are produced by Miller's backward recurrence normalized
//! with the generating-function identity
//! `e^{-τ} (I_0 + 2 Σ_{n≥1} I_n) = 1`; tiny arguments use the power series.

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Below this argument the power series converges in a couple of terms.
const SERIES_CUTOFF: f64 = 1e-3;

/// `e^{-τ} I_n(τ)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledInfeldRow<T> {
    tau: T,
    values: Vec<T>,
}

impl<T: Real> ScaledInfeldRow<T> {
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at signed order `n`, using `I_{-n} = I_n`.
    ///
    /// Panics if `|n|` exceeds the computed range.
    pub fn at(&self, n: i64) -> T {
        self.values[n.unsigned_abs() as usize]
    }
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if !tau.is_finite() {
        return Err(invalid("tau", format!("must be finite, got {tau}")));
    }
    if tau < T::zero() {
        return Err(invalid("tau", format!("must be nonnegative, got {tau}")));
    }
    Ok(())
}

/// Scaled Infeld functions `e^{-τ} I_n(τ)` for `n = 0..=n_max`.
///
/// For a given `τ` the returned prefix does not depend on `n_max` as long as
/// `n_max` stays below the order where the values underflow: the backward
/// recurrence always starts from the same τ-dependent order.
pub fn scaled_infeld_row<T: Real>(tau: T, n_max: usize) -> Result<ScaledInfeldRow<T>> {
    check_tau(tau)?;
    let values = if tau == T::zero() {
        let mut v = vec![T::zero(); n_max + 1];
        v[0] = T::one();
        v
    } else if tau <= T::lit(SERIES_CUTOFF) {
        series_row(tau, n_max)
    } else {
        miller_row(tau, n_max)
    };
    Ok(ScaledInfeldRow { tau, values })
}

/// Single value `e^{-τ} I_n(τ)`.
pub fn scaled_infeld<T: Real>(n: usize, tau: T) -> Result<T> {
    let row = scaled_infeld_row(tau, n)?;
    Ok(row.values[n])
}

fn series_row<T: Real>(tau: T, n_max: usize) -> Vec<T> {
    let half = tau / T::lit(2.0);
    let quarter_sq = half * half;
    let scale = (-tau).exp();
    let eps = T::default_epsilon();
    let mut lead = T::one(); // (τ/2)^n / n!
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            lead = lead * half / T::from_count(n);
        }
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..64usize {
            term = term * quarter_sq / (T::from_count(k) * T::from_count(k + n));
            sum += term;
            if term <= eps * sum {
                break;
            }
        }
        out.push(scale * lead * sum);
    }
    out
}

/// Order beyond which `e^{-τ} I_n(τ)` is below the smallest normal number.
///
/// Uses the uniform large-order asymptote
/// `e^{-τ} I_n(τ) ≈ e^{η} / √(2π√(n²+τ²))`, `η = √(n²+τ²) − τ − n·asinh(n/τ)`,
/// padded by a few orders.
fn underflow_order<T: Real>(tau: T) -> usize {
    let t = tau.as_f64();
    let depth = -T::tiniest().as_f64().ln();
    let log_value = |n: f64| {
        let r = (n * n + t * t).sqrt();
        r - t - n * (n / t).asinh() - 0.5 * (2.0 * std::f64::consts::PI * r).ln()
    };
    let mut n = 1usize;
    while log_value(n as f64) > -depth {
        n += 1 + n / 8;
    }
    n + 10
}

fn miller_row<T: Real>(tau: T, n_max: usize) -> Vec<T> {
    let work = n_max.max(underflow_order(tau));
    let margin = (2.0 * (work as f64 * tau.as_f64().max(1.0)).sqrt()).ceil() as usize;
    let start = work + margin.max(20);

    let big = T::largest().sqrt();
    let shrink = T::one() / big;
    let two_over_tau = T::lit(2.0) / tau;

    let mut stored = vec![T::zero(); n_max + 1];
    let mut above = T::zero();
    let mut cur = T::one();
    let mut tail = T::zero();

    for n in (1..=start).rev() {
        if n <= n_max {
            stored[n] = cur;
        }
        tail += cur + cur;
        let below = two_over_tau * T::from_count(n) * cur + above;
        above = cur;
        cur = below;
        if cur > big {
            cur *= shrink;
            above *= shrink;
            tail *= shrink;
            let lo = n.min(n_max + 1);
            for v in &mut stored[lo..] {
                *v *= shrink;
            }
        }
    }
    stored[0] = cur;
    let norm = tail + cur;
    for v in &mut stored {
        *v /= norm;
    }
    stored
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain power series, fine for moderate arguments.
    fn series(n: usize, tau: f64) -> f64 {
        let half = tau / 2.0;
        let mut lead = 1.0;
        for k in 1..=n {
            lead *= half / k as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400usize {
            term *= half * half / (k as f64 * (k + n) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        (-tau).exp() * lead * sum
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_argument_is_kronecker_delta() {
        let row = scaled_infeld_row(0.0f64, 3).unwrap();
        assert_eq!(row.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(scaled_infeld(0, 0.0f64).unwrap(), 1.0);
        assert_eq!(scaled_infeld(5, 0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn unit_argument_matches_series() {
        let row = scaled_infeld_row(1.0f64, 1).unwrap();
        assert!(rel(row.values()[0], series(0, 1.0)) < 1e-14);
        assert!(rel(row.values()[1], series(1, 1.0)) < 1e-14);
    }

    #[test]
    fn single_value_matches_series() {
        let v = scaled_infeld(2, 3.5f64).unwrap();
        assert!(rel(v, series(2, 3.5)) < 1e-13);
    }

    #[test]
    fn single_value_equals_row_entry() {
        for &tau in &[0.0005, 0.3, 7.0, 250.0] {
            for n in [0usize, 1, 4, 17] {
                let row = scaled_infeld_row(tau, n).unwrap();
                assert_eq!(scaled_infeld(n, tau).unwrap(), row.values()[n]);
            }
        }
    }

    #[test]
    fn small_argument_series_branch() {
        let tau = 4e-4;
        let row = scaled_infeld_row(tau, 5).unwrap();
        for n in 0..=5 {
            assert!(rel(row.values()[n], series(n, tau)) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(scaled_infeld_row(-1.0f64, 3).is_err());
        assert!(scaled_infeld_row(f64::NAN, 3).is_err());
        assert!(scaled_infeld_row(f64::INFINITY, 3).is_err());
    }

    #[test]
    fn large_argument_stays_finite() {
        let row = scaled_infeld_row(5000.0f64, 10).unwrap();
        let asymptote = 1.0 / (2.0 * std::f64::consts::PI * 5000.0).sqrt();
        assert!(rel(row.values()[0], asymptote) < 1e-3);
        assert!(row.values().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn prefix_independent_of_requested_length() {
        for &tau in &[0.04, 4.0, 400.0, 1600.0] {
            let short = scaled_infeld_row(tau, 40).unwrap();
            let long = scaled_infeld_row(tau, 60).unwrap();
            assert_eq!(short.values(), &long.values()[..=40]);
        }
    }

    #[test]
    fn recurrence_residual() {
        for &tau in &[0.04, 4.0, 400.0, 1600.0] {
            let row = scaled_infeld_row(tau, 300).unwrap();
            let v = row.values();
            for n in 1..300 {
                let r = v[n - 1] - v[n + 1] - 2.0 * n as f64 / tau * v[n];
                assert!(r.abs() <= 1e-10 * v[0], "tau={tau} n={n} r={r:e}");
            }
        }
    }

    #[test]
    fn single_precision_is_consistent() {
        let row = scaled_infeld_row(40.0f32, 10).unwrap();
        let reference = scaled_infeld_row(40.0f64, 10).unwrap();
        for n in 0..=10 {
            assert!(rel(row.values()[n] as f64, reference.values()[n]) < 1e-5);
        }
    }
}
