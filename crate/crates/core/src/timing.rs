//! Latency and energy accounting over command traces, plus the
//! bandwidth-bound baseline that Ambit is compared against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{symbolic_trace, BbopKind};
use crate::trace::{Command, CommandTrace, Primitive, TraceEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimingError {
    #[error("calibration infeasible: {0}")]
    Infeasible(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    /// One row decoder; the second ACTIVATE of an AAP waits a full tRAS.
    Naive,
    /// Separate B-group decoder; the two ACTIVATEs of an AAP overlap.
    Split,
}

/// DRAM timing parameters, in nanoseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub t_ras: f64,
    pub t_rcd: f64,
    pub t_rp: f64,
    pub t_wr: f64,
    /// Extra time of the overlapped second ACTIVATE beyond tRAS.
    pub aap_overlap_delta: f64,
    /// One 64-byte column burst.
    pub t_burst: f64,
    pub mode: DecoderMode,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self::ddr3_1600_888()
    }
}

impl TimingConfig {
    /// DDR3-1600 8-8-8.
    pub fn ddr3_1600_888() -> Self {
        Self {
            t_ras: 35.0,
            t_rcd: 10.0,
            t_rp: 10.0,
            t_wr: 15.0,
            aap_overlap_delta: 4.0,
            t_burst: 5.0,
            mode: DecoderMode::Split,
        }
    }

    /// DDR3-1600 with the datasheet-table tRCD/tRP of 15 ns.
    pub fn ddr3_1600_table() -> Self {
        Self {
            t_rcd: 15.0,
            t_rp: 15.0,
            ..Self::ddr3_1600_888()
        }
    }

    pub fn with_mode(mut self, mode: DecoderMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn aap_ns(&self) -> f64 {
        match self.mode {
            DecoderMode::Naive => 2.0 * self.t_ras + self.t_rp,
            DecoderMode::Split => self.t_ras + self.aap_overlap_delta + self.t_rp,
        }
    }

    pub fn ap_ns(&self) -> f64 {
        self.t_ras + self.t_rp
    }

    /// Inter-bank copy of `columns` 64-byte columns.
    pub fn psm_ns(&self, columns: usize) -> f64 {
        self.t_rcd + columns as f64 * self.t_burst + self.t_wr + self.t_rp
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("t_ras", self.t_ras),
            ("t_rcd", self.t_rcd),
            ("t_rp", self.t_rp),
            ("t_wr", self.t_wr),
            ("aap_overlap_delta", self.aap_overlap_delta),
            ("t_burst", self.t_burst),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if self.ap_ns() <= 0.0 {
            return Err("t_ras + t_rp must be positive".into());
        }
        Ok(())
    }
}

/// Latency of one primitive (a slice starting at an `aap_boundary`).
pub fn primitive_latency(entries: &[TraceEntry], cfg: &TimingConfig) -> f64 {
    match entries[0].primitive {
        Primitive::Aap => cfg.aap_ns(),
        Primitive::Ap => cfg.ap_ns(),
        Primitive::Psm => {
            let columns = entries.iter().filter(|e| e.command == Command::Transfer).count();
            cfg.psm_ns(columns)
        }
    }
}

/// Serial latency of a trace in nanoseconds.
pub fn latency_of(trace: &CommandTrace, cfg: &TimingConfig) -> f64 {
    trace.primitives().map(|p| primitive_latency(p, cfg)).sum()
}

/// Per-command energy parameters, in nJ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    /// One ACTIVATE raising a single wordline.
    pub e_act_base: f64,
    /// Multiplier per additional raised wordline.
    pub extra_wordline_factor: f64,
    pub e_pre: f64,
    /// Moving one KB over the channel, read and write direction.
    pub e_ddr3_read_kb: f64,
    pub e_ddr3_write_kb: f64,
    /// One 64-byte TRANSFER between banks.
    pub e_transfer: f64,
    pub row_kb: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        let raw = Self {
            e_act_base: 1.0,
            extra_wordline_factor: 1.22,
            e_pre: 0.3,
            e_ddr3_read_kb: 44.2,
            e_ddr3_write_kb: 49.5,
            e_transfer: 44.2 / 16.0,
            row_kb: 8.0,
        };
        calibrate(&raw, &CalibrationTargets::default()).expect("default targets are feasible")
    }
}

impl EnergyConfig {
    pub fn activate_nj(&self, wordlines: u8) -> f64 {
        self.e_act_base * self.extra_wordline_factor.powi(i32::from(wordlines.max(1)) - 1)
    }

    pub fn command_nj(&self, entry: &TraceEntry) -> f64 {
        match entry.command {
            Command::Activate => self.activate_nj(entry.wordlines_raised),
            Command::Precharge => self.e_pre,
            Command::Transfer => self.e_transfer,
            Command::Read => self.e_ddr3_read_kb / 16.0,
            Command::Write => self.e_ddr3_write_kb / 16.0,
        }
    }

    /// Channel energy per KB of a host-side run of `kind`.
    pub fn baseline_nj_per_kb(&self, kind: BbopKind) -> f64 {
        kind.arity() as f64 * self.e_ddr3_read_kb + self.e_ddr3_write_kb
    }
}

pub fn energy_of(trace: &CommandTrace, cfg: &EnergyConfig) -> f64 {
    trace.iter().map(|e| cfg.command_nj(e)).sum()
}

/// Energy per KB of output, for a trace producing `output_rows` rows.
pub fn energy_per_kb(trace: &CommandTrace, cfg: &EnergyConfig, output_rows: usize) -> f64 {
    energy_of(trace, cfg) / (output_rows as f64 * cfg.row_kb)
}

/// Per-KB energy of one row-wide `kind`.
pub fn op_energy_per_kb(kind: BbopKind, cfg: &EnergyConfig) -> f64 {
    energy_per_kb(&symbolic_trace(kind), cfg, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTargets {
    pub not_nj_per_kb: f64,
    pub pre_to_act_ratio: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            not_nj_per_kb: 1.6,
            pre_to_act_ratio: 0.3,
        }
    }
}

/// Solves `e_act_base` (and `e_pre` through the fixed ratio) so that `not`
/// costs exactly the target energy per KB.
pub fn calibrate(cfg: &EnergyConfig, targets: &CalibrationTargets) -> Result<EnergyConfig, TimingError> {
    let t = targets.not_nj_per_kb;
    if !(t > 0.0 && t.is_finite()) {
        return Err(TimingError::Infeasible(format!("not target must be positive, got {t}")));
    }
    let r = targets.pre_to_act_ratio;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(TimingError::Infeasible(format!("precharge ratio must be >= 0, got {r}")));
    }
    if !(cfg.row_kb > 0.0 && cfg.extra_wordline_factor > 0.0) {
        return Err(TimingError::Infeasible("row_kb and wordline factor must be positive".into()));
    }
    let unit = EnergyConfig {
        e_act_base: 1.0,
        e_pre: r,
        ..cfg.clone()
    };
    let per_unit = energy_per_kb(&symbolic_trace(BbopKind::Not), &unit, 1);
    let e_act = t / per_unit;
    Ok(EnergyConfig {
        e_act_base: e_act,
        e_pre: r * e_act,
        ..cfg.clone()
    })
}

/// A memory channel the baseline streams operands over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthPreset {
    pub name: String,
    pub bytes_per_second: f64,
}

impl Default for BandwidthPreset {
    fn default() -> Self {
        Self::skylake()
    }
}

impl BandwidthPreset {
    /// Two 64-bit DDR3-2133 channels.
    pub fn skylake() -> Self {
        Self {
            name: "skylake".into(),
            bytes_per_second: 2.0 * 2133e6 * 8.0,
        }
    }

    /// One 128-bit DDR3-1800 channel.
    pub fn gtx745() -> Self {
        Self {
            name: "gtx745".into(),
            bytes_per_second: 1800e6 * 16.0,
        }
    }

    /// 32 vaults at 10 GB/s.
    pub fn hmc2() -> Self {
        Self {
            name: "hmc2".into(),
            bytes_per_second: 32.0 * 10e9,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "skylake" => Some(Self::skylake()),
            "gtx745" => Some(Self::gtx745()),
            "hmc2" => Some(Self::hmc2()),
            _ => None,
        }
    }

    /// Nanoseconds to stream `bytes` over the channel.
    pub fn transfer_ns(&self, bytes: f64) -> f64 {
        bytes / self.bytes_per_second * 1e9
    }
}

/// Output bytes per second of `kind` with every bank busy on its own row.
pub fn ambit_throughput(kind: BbopKind, banks: usize, row_bytes: usize, cfg: &TimingConfig) -> f64 {
    let ns = latency_of(&symbolic_trace(kind), cfg);
    banks as f64 * row_bytes as f64 / ns * 1e9
}

/// Output bytes per second when the host streams operands and result.
pub fn baseline_throughput(kind: BbopKind, preset: &BandwidthPreset) -> f64 {
    preset.bytes_per_second / kind.streams() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpReport {
    pub op: BbopKind,
    pub latency_ns: f64,
    pub energy_nj_per_kb: f64,
    pub ambit_gbps: f64,
    pub baseline_gbps: f64,
    pub speedup: f64,
    pub energy_reduction: f64,
}

impl OpReport {
    pub fn new(
        kind: BbopKind,
        banks: usize,
        row_bytes: usize,
        timing: &TimingConfig,
        energy: &EnergyConfig,
        baseline: &BandwidthPreset,
    ) -> Self {
        let ambit = ambit_throughput(kind, banks, row_bytes, timing);
        let base = baseline_throughput(kind, baseline);
        let e = op_energy_per_kb(kind, energy);
        Self {
            op: kind,
            latency_ns: latency_of(&symbolic_trace(kind), timing),
            energy_nj_per_kb: e,
            ambit_gbps: ambit / 1e9,
            baseline_gbps: base / 1e9,
            speedup: ambit / base,
            energy_reduction: energy.baseline_nj_per_kb(kind) / e,
        }
    }
}
