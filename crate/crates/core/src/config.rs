//! Simulation configuration, loadable from JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dram::ChipConfig;
use crate::timing::{calibrate, BandwidthPreset, CalibrationTargets, EnergyConfig, TimingConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub chip: ChipConfig,
    pub timing: TimingConfig,
    pub energy: EnergyConfig,
    /// Recalibrates `energy` on load when present.
    pub calibration: Option<CalibrationTargets>,
    pub baseline: BandwidthPreset,
    /// Cost of writing back one dirty 64-byte line before an operation.
    pub flush_ns_per_line: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            chip: ChipConfig::default(),
            timing: TimingConfig::default(),
            energy: EnergyConfig::default(),
            calibration: None,
            baseline: BandwidthPreset::skylake(),
            flush_ns_per_line: 5.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| format!("bad config: {e}"))?;
        cfg.finish()
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    /// Applies calibration and checks every section.
    pub fn finish(mut self) -> Result<Self, String> {
        if let Some(targets) = &self.calibration {
            self.energy = calibrate(&self.energy, targets).map_err(|e| e.to_string())?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.chip.validate().map_err(|e| e.to_string())?;
        self.timing.validate()?;
        if !(self.baseline.bytes_per_second > 0.0) {
            return Err("baseline bandwidth must be positive".into());
        }
        if !(self.flush_ns_per_line >= 0.0) {
            return Err("flush_ns_per_line must be >= 0".into());
        }
        Ok(())
    }

    pub fn row_bytes(&self) -> usize {
        self.chip.row_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let cfg = SimConfig::from_json(r#"{"chip": {"banks": 16}, "timing": {"t_rp": 15}}"#).unwrap();
        assert_eq!(cfg.chip.banks, 16);
        assert_eq!(cfg.chip.row_bits, 65536);
        assert_eq!(cfg.timing.t_rp, 15.0);
        assert_eq!(cfg.timing.t_ras, 35.0);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(SimConfig::from_json(r#"{"chips": {}}"#).is_err());
        assert!(SimConfig::from_json(r#"{"chip": {"row_bits": 100}}"#).is_err());
        assert!(SimConfig::from_json(r#"{"calibration": {"not_nj_per_kb": -1}}"#).is_err());
    }

    #[test]
    fn recalibrates() {
        let cfg = SimConfig::from_json(r#"{"calibration": {"not_nj_per_kb": 3.2}}"#).unwrap();
        let base = SimConfig::default();
        assert!((cfg.energy.e_act_base / base.energy.e_act_base - 2.0).abs() < 1e-12);
    }
}
