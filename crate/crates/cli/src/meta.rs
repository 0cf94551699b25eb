use std::path::Path;

use azimodes::{ChiVariant, ExperimentConfig};
use serde::{Deserialize, Serialize};

/// Per-frequency numerical settings of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPoint {
    pub f_thz: f64,
    pub tau: f64,
    pub n_max: usize,
    pub grid: Option<usize>,
}

/// Written as `meta.json` next to the files of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub chi: ChiVariant,
    #[serde(rename = "gainLG")]
    pub gains: Vec<f64>,
    pub runs: Vec<RunPoint>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunMetadata {
    pub fn new(command: &str, config: ExperimentConfig, chi: ChiVariant) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            chi,
            gains: Vec::new(),
            runs: Vec::new(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("metadata serializes");
        std::fs::write(dir.join("meta.json"), text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunMetadata {
        let mut m = RunMetadata::new("modes", ExperimentConfig::default(), ChiVariant::Chi2);
        m.gains = vec![0.1 + 0.2];
        m.runs.push(RunPoint {
            f_thz: 0.1,
            tau: 4.009_123_456_789_012,
            n_max: 18,
            grid: Some(256),
        });
        m.outputs = vec!["eigenvalues.csv".into()];
        m.wall_time_s = 0.012_345;
        m
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = sample();
        let back: RunMetadata = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn golden_keys() {
        let value = serde_json::to_value(sample()).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "chi",
                "command",
                "config",
                "gainLG",
                "outputs",
                "runs",
                "tool_version",
                "wall_time_s"
            ]
        );
        let config: Vec<&String> = value["config"].as_object().unwrap().keys().collect();
        assert_eq!(
            config,
            [
                "beam_diameter",
                "crystal_length",
                "gain_model",
                "gain_ref",
                "gain_ref_frequency",
                "idler_polar_angle",
                "pump_wavelength",
                "thz_refractive_index"
            ]
        );
        assert_eq!(value["chi"], "chi2");
    }
}
