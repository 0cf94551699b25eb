//! Experimental setup and its reduction to the two dimensionless numbers of
//! the model: the geometry parameter `τ` and the parametric gain `γ̃L`.
//!
//! Everything is stored in SI units. Frequencies passed to the functions
//! of this module are in THz, the unit used by every output file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HZ_PER_THZ: f64 = 1e12;
/// Upper end of the frequency range where the constant-index model holds.
pub const MAX_VALID_THZ: f64 = 2.0;

/// How `γ̃L` depends on the idler frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    /// Same `γ̃L` at every frequency.
    Fixed,
    /// `γ̃L ∝ f_i` at constant pump, anchored at the reference frequency.
    PumpScaled,
}

impl fmt::Display for GainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainModel::Fixed => "fixed",
            GainModel::PumpScaled => "pump_scaled",
        })
    }
}

impl FromStr for GainModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(GainModel::Fixed),
            "pump_scaled" | "pump-scaled" => Ok(GainModel::PumpScaled),
            other => Err(invalid(
                "gain_model",
                format!("expected `fixed` or `pump_scaled`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Metres.
    pub pump_wavelength: f64,
    /// Metres.
    pub crystal_length: f64,
    /// Pump beam diameter `d`, metres.
    pub beam_diameter: f64,
    /// Idler polar angle `θ_i`, radians.
    pub idler_polar_angle: f64,
    pub thz_refractive_index: f64,
    /// `γ̃L` at the reference frequency.
    pub gain_ref: f64,
    pub gain_model: GainModel,
    /// Hz; only used by [`GainModel::PumpScaled`].
    pub gain_ref_frequency: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pump_wavelength: 523.3e-9,
            crystal_length: 1e-3,
            beam_diameter: 300e-6,
            idler_polar_angle: 60f64.to_radians(),
            thz_refractive_index: 5.20,
            gain_ref: 0.01,
            gain_model: GainModel::Fixed,
            gain_ref_frequency: 1e12,
        }
    }
}

/// Physical dimension of a configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Frequency,
    Angle,
    Dimensionless,
}

const LENGTH_UNITS: &[(&str, f64)] = &[
    ("nm", 1e-9),
    ("um", 1e-6),
    ("μm", 1e-6),
    ("µm", 1e-6),
    ("mm", 1e-3),
    ("cm", 1e-2),
    ("m", 1.0),
];
const FREQUENCY_UNITS: &[(&str, f64)] = &[("THz", 1e12), ("GHz", 1e9), ("MHz", 1e6), ("Hz", 1.0)];
const ANGLE_UNITS: &[(&str, f64)] = &[("deg", std::f64::consts::PI / 180.0), ("rad", 1.0)];

/// Parses `"<number> <unit>"` (space optional) into SI units.
///
/// A bare number is taken as already in SI units (radians for angles).
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let text = text.trim();
    let units: &[(&str, f64)] = match dim {
        Dimension::Length => LENGTH_UNITS,
        Dimension::Frequency => FREQUENCY_UNITS,
        Dimension::Angle => ANGLE_UNITS,
        Dimension::Dimensionless => &[],
    };
    let (number, factor) = units
        .iter()
        .find_map(|(suffix, factor)| text.strip_suffix(suffix).map(|n| (n.trim_end(), *factor)))
        .unwrap_or((text, 1.0));
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse quantity `{text}`")))?;
    Ok(value * factor)
}

const KEYS: &[(&str, Dimension)] = &[
    ("pump_wavelength", Dimension::Length),
    ("crystal_length", Dimension::Length),
    ("beam_diameter", Dimension::Length),
    ("idler_polar_angle", Dimension::Angle),
    ("thz_refractive_index", Dimension::Dimensionless),
    ("gain_ref", Dimension::Dimensionless),
    ("gain_model", Dimension::Dimensionless),
    ("gain_ref_frequency", Dimension::Frequency),
];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pump_wavelength", self.pump_wavelength),
            ("crystal_length", self.crystal_length),
            ("beam_diameter", self.beam_diameter),
            ("gain_ref_frequency", self.gain_ref_frequency),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        let theta = self.idler_polar_angle;
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(
                "idler_polar_angle",
                format!("must lie in (0, π/2) rad, got {theta}"),
            ));
        }
        let n = self.thz_refractive_index;
        if !(n.is_finite() && n >= 1.0) {
            return Err(invalid(
                "thz_refractive_index",
                format!("must be ≥ 1, got {n}"),
            ));
        }
        if !(self.gain_ref.is_finite() && self.gain_ref >= 0.0) {
            return Err(invalid(
                "gain_ref",
                format!("must be finite and nonnegative, got {}", self.gain_ref),
            ));
        }
        Ok(())
    }

    /// Applies one `key = value` setting on top of the current values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let dim = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        if key == "gain_model" {
            self.gain_model = value.parse()?;
            return Ok(());
        }
        let v = parse_quantity(value, dim).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        match key {
            "pump_wavelength" => self.pump_wavelength = v,
            "crystal_length" => self.crystal_length = v,
            "beam_diameter" => self.beam_diameter = v,
            "idler_polar_angle" => self.idler_polar_angle = v,
            "thz_refractive_index" => self.thz_refractive_index = v,
            "gain_ref" => self.gain_ref = v,
            _ => self.gain_ref_frequency = v,
        }
        Ok(())
    }

    /// Plain-text form: one `key = value` per line, `#` starts a comment.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON object with the same keys; values are unit-suffixed strings or
    /// plain numbers in SI units.
    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        for (key, value) in &map {
            let s = match value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => return Err(Error::Config(format!("{key}: unsupported value {other}"))),
            };
            cfg.set(key, &s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Detects the format from the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_key_values(text)
        }
    }

    /// Fields as `(key, value)` with SI unit suffixes; values use the
    /// shortest representation that parses back to the same bits.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("pump_wavelength", format!("{} m", self.pump_wavelength)),
            ("crystal_length", format!("{} m", self.crystal_length)),
            ("beam_diameter", format!("{} m", self.beam_diameter)),
            (
                "idler_polar_angle",
                format!("{} rad", self.idler_polar_angle),
            ),
            (
                "thz_refractive_index",
                format!("{}", self.thz_refractive_index),
            ),
            ("gain_ref", format!("{}", self.gain_ref)),
            ("gain_model", self.gain_model.to_string()),
            (
                "gain_ref_frequency",
                format!("{} Hz", self.gain_ref_frequency),
            ),
        ]
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("config serializes")
    }

    pub fn to_key_values(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

impl Serialize for ExperimentConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        Self::from_json(&value.to_string()).map_err(serde::de::Error::custom)
    }
}

/// Rejects frequencies outside `(0, 2]` THz.
pub fn check_validity(f_thz: f64) -> Result<()> {
    if !(f_thz > 0.0 && f_thz <= MAX_VALID_THZ) {
        return Err(Error::OutOfValidity(f_thz));
    }
    Ok(())
}

fn check_frequency(f_thz: f64) -> Result<()> {
    if !(f_thz.is_finite() && f_thz > 0.0) {
        return Err(invalid("f_i", format!("must be positive, got {f_thz} THz")));
    }
    Ok(())
}

/// Idler wavenumber inside the crystal, 1/m.
pub fn idler_wavenumber(f_thz: f64, cfg: &ExperimentConfig) -> f64 {
    2.0 * std::f64::consts::PI * f_thz * HZ_PER_THZ * cfg.thz_refractive_index / SPEED_OF_LIGHT
}

/// `τ = (k_i d sin θ_i)² / 2`.
pub fn tau_of_frequency(f_thz: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_frequency(f_thz)?;
    let x = idler_wavenumber(f_thz, cfg) * cfg.beam_diameter * cfg.idler_polar_angle.sin();
    Ok(x * x / 2.0)
}

/// `γ̃L` at the given frequency under the configured gain model.
pub fn gain_of_frequency(f_thz: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_frequency(f_thz)?;
    match cfg.gain_model {
        GainModel::Fixed => Ok(cfg.gain_ref),
        GainModel::PumpScaled => {
            let f_ref = cfg.gain_ref_frequency;
            if !(f_ref.is_finite() && f_ref > 0.0) {
                return Err(invalid(
                    "gain_ref_frequency",
                    format!("must be positive, got {f_ref}"),
                ));
            }
            Ok(cfg.gain_ref * f_thz * HZ_PER_THZ / f_ref)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint {
    pub f_thz: f64,
    pub tau: f64,
    #[serde(rename = "gainLG")]
    pub gain_lg: f64,
}

pub fn dimensionless_point(f_thz: f64, cfg: &ExperimentConfig) -> Result<DimensionlessPoint> {
    Ok(DimensionlessPoint {
        f_thz,
        tau: tau_of_frequency(f_thz, cfg)?,
        gain_lg: gain_of_frequency(f_thz, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tau_endpoints() {
        let cfg = ExperimentConfig::default();
        let low = tau_of_frequency(0.01, &cfg).unwrap();
        let high = tau_of_frequency(2.0, &cfg).unwrap();
        assert!((low - 0.04).abs() < 0.004, "{low}");
        assert!((high - 1600.0).abs() < 160.0, "{high}");
        let mid = tau_of_frequency(0.1, &cfg).unwrap();
        assert!((mid - 100.0 * low).abs() < 1e-12 * mid);
        assert!(tau_of_frequency(0.0, &cfg).is_err());
        assert!(tau_of_frequency(-1.0, &cfg).is_err());
    }

    #[test]
    fn gain_models() {
        let mut cfg = ExperimentConfig {
            gain_ref: 0.5,
            ..Default::default()
        };
        assert_eq!(gain_of_frequency(1.0, &cfg).unwrap(), 0.5);
        cfg.gain_model = GainModel::PumpScaled;
        cfg.gain_ref_frequency = 1e12;
        assert_eq!(gain_of_frequency(2.0, &cfg).unwrap(), 1.0);
        assert_eq!(gain_of_frequency(1.0, &cfg).unwrap(), 0.5);
        cfg.gain_ref_frequency = 0.0;
        assert!(gain_of_frequency(1.0, &cfg).is_err());
    }

    #[test]
    fn validity_window() {
        assert!(check_validity(2.0).is_ok());
        assert!(check_validity(0.01).is_ok());
        assert_eq!(check_validity(3.0), Err(Error::OutOfValidity(3.0)));
        assert!(check_validity(0.0).is_err());
        assert!(Error::OutOfValidity(3.0).to_string().contains("2 THz"));
    }

    #[test]
    fn quantities() {
        assert_eq!(
            parse_quantity("523.3 nm", Dimension::Length).unwrap(),
            523.3 * 1e-9
        );
        assert_eq!(
            parse_quantity("300um", Dimension::Length).unwrap(),
            300.0 * 1e-6
        );
        assert_eq!(
            parse_quantity("300 μm", Dimension::Length).unwrap(),
            300.0 * 1e-6
        );
        assert_eq!(parse_quantity("1 mm", Dimension::Length).unwrap(), 1e-3);
        assert_eq!(
            parse_quantity("0.5 THz", Dimension::Frequency).unwrap(),
            0.5e12
        );
        assert_eq!(
            parse_quantity("60 deg", Dimension::Angle).unwrap(),
            60f64.to_radians()
        );
        assert_eq!(parse_quantity("1.2 rad", Dimension::Angle).unwrap(), 1.2);
        assert_eq!(
            parse_quantity("5.2", Dimension::Dimensionless).unwrap(),
            5.2
        );
        assert!(parse_quantity("abc nm", Dimension::Length).is_err());
        assert!(parse_quantity("3 THz", Dimension::Length).is_err());
    }

    #[test]
    fn key_value_file() {
        let text = "# setup\nbeam_diameter = 200 um\nidler_polar_angle = 45 deg\ngain_model = pump-scaled\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.beam_diameter, 200.0 * 1e-6);
        assert_eq!(cfg.idler_polar_angle, 45f64.to_radians());
        assert_eq!(cfg.gain_model, GainModel::PumpScaled);
        assert_eq!(cfg.pump_wavelength, 523.3e-9);
        let err = ExperimentConfig::parse("nonsense = 1\n").unwrap_err();
        assert!(err.to_string().contains("nonsense"));
        assert!(ExperimentConfig::parse("idler_polar_angle = 100 deg").is_err());
    }

    #[test]
    fn json_file() {
        let cfg =
            ExperimentConfig::parse(r#"{"crystal_length": "2 mm", "thz_refractive_index": 5.0}"#)
                .unwrap();
        assert_eq!(cfg.crystal_length, 2e-3);
        assert_eq!(cfg.thz_refractive_index, 5.0);
        assert!(ExperimentConfig::parse(r#"{"crystal_length": [1]}"#).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let cfg = ExperimentConfig {
            gain_model: GainModel::PumpScaled,
            gain_ref: 0.1 + 0.2,
            ..Default::default()
        };
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(ExperimentConfig::parse(&cfg.to_key_values()).unwrap(), cfg);
    }

    proptest! {
        #[test]
        fn quadratic_scaling(f in 0.001f64..2.0, g in 0.001f64..2.0) {
            let cfg = ExperimentConfig::default();
            let a = tau_of_frequency(f, &cfg).unwrap() * g * g;
            let b = tau_of_frequency(g, &cfg).unwrap() * f * f;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }

        #[test]
        fn monotone_in_each_parameter(f in 0.01f64..2.0, scale in 1.001f64..1.5) {
            let base = ExperimentConfig::default();
            let tau = tau_of_frequency(f, &base).unwrap();
            prop_assert!(tau_of_frequency(f * scale, &base).unwrap() > tau);
            let wider = ExperimentConfig { beam_diameter: base.beam_diameter * scale, ..base };
            prop_assert!(tau_of_frequency(f, &wider).unwrap() > tau);
            let denser = ExperimentConfig { thz_refractive_index: base.thz_refractive_index * scale, ..base };
            prop_assert!(tau_of_frequency(f, &denser).unwrap() > tau);
            let steeper = ExperimentConfig {
                idler_polar_angle: (base.idler_polar_angle * scale).min(1.5),
                ..base
            };
            prop_assert!(tau_of_frequency(f, &steeper).unwrap() > tau);
        }

        #[test]
        fn config_round_trips(d in 1e-6f64..1e-2, theta in 0.01f64..1.5, n in 1.0f64..10.0, g in 0.0f64..5.0) {
            let cfg = ExperimentConfig {
                beam_diameter: d,
                idler_polar_angle: theta,
                thz_refractive_index: n,
                gain_ref: g,
                ..Default::default()
            };
            prop_assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }
}
