//! Monte-Carlo and worst-case analysis of triple-row activation under
//! process variation.
//!
//! Every varied quantity is scaled by an independent multiplier drawn
//! uniformly from `[1 - v, 1 + v]`: the three cell capacitances, the
//! bitline capacitance, V_DD (cell and precharge levels together), the
//! sense-amplifier offset, and the retained charge of each cell. A charged
//! cell stores `min(1, m)` of full charge.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dram::{charge_share_deviation, DeviceParams};

/// Which quantities vary from trial to trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariedComponents {
    pub cell_capacitance: bool,
    pub bitline_capacitance: bool,
    pub vdd: bool,
    pub offset: bool,
    pub retention: bool,
}

impl Default for VariedComponents {
    fn default() -> Self {
        Self {
            cell_capacitance: true,
            bitline_capacitance: true,
            vdd: true,
            offset: true,
            retention: true,
        }
    }
}

impl VariedComponents {
    pub fn capacitance_only() -> Self {
        Self {
            cell_capacitance: true,
            bitline_capacitance: false,
            vdd: false,
            offset: false,
            retention: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationModel {
    /// Half-width of the multiplier range; at most 0.5.
    pub variation: f64,
    pub device: DeviceParams,
    pub components: VariedComponents,
    pub seed: u64,
}

impl VariationModel {
    pub fn new(variation: f64, seed: u64) -> Self {
        Self {
            variation,
            device: DeviceParams::default(),
            components: VariedComponents::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=0.5).contains(&self.variation) {
            return Err(format!("variation must lie in [0, 0.5], got {}", self.variation));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub variation: f64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    /// Trials in which some input combination with k charged cells failed.
    pub per_k: [u64; 4],
}

impl MCResult {
    pub fn rate_for_k(&self, k: usize) -> f64 {
        self.per_k[k] as f64 / self.trials as f64
    }
}

/// Failure rates reported for the circuit-level study, as fractions.
pub const REFERENCE_RATES: [(f64, f64); 6] = [
    (0.00, 0.0),
    (0.05, 0.0),
    (0.10, 0.0029),
    (0.15, 0.0601),
    (0.20, 0.1636),
    (0.25, 0.2619),
];

pub fn reference_rate(variation: f64) -> Option<f64> {
    REFERENCE_RATES
        .iter()
        .find(|(v, _)| (v - variation).abs() < 1e-9)
        .map(|&(_, r)| r)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial)
}

/// One sampled subarray column.
#[derive(Clone, Copy, Debug)]
struct Sample {
    caps: [f64; 3],
    bitline: f64,
    vdd: f64,
    offset: f64,
    retention: [f64; 3],
}

fn sample<R: Rng>(model: &VariationModel, rng: &mut R) -> Sample {
    let v = model.variation;
    let mut m = |on: bool| {
        if on && v > 0.0 {
            rng.random_range(1.0 - v..=1.0 + v)
        } else {
            1.0
        }
    };
    let c = model.components;
    let d = &model.device;
    let caps = [m(c.cell_capacitance), m(c.cell_capacitance), m(c.cell_capacitance)]
        .map(|x| x * d.cell_capacitance);
    let bitline = m(c.bitline_capacitance) * d.bitline_capacitance;
    let vdd = m(c.vdd) * d.vdd;
    let offset = m(c.offset) * d.offset_threshold * d.vdd;
    let retention = [m(c.retention), m(c.retention), m(c.retention)].map(|x| x.min(1.0));
    Sample {
        caps,
        bitline,
        vdd,
        offset,
        retention,
    }
}

/// Per-k failure flags over all eight input combinations.
fn evaluate(s: &Sample) -> [bool; 4] {
    let mut failed = [false; 4];
    for combo in 0u8..8 {
        let charges: [f64; 3] =
            std::array::from_fn(|i| if combo >> i & 1 == 1 { s.retention[i] } else { 0.0 });
        let k = combo.count_ones() as usize;
        let volts = charge_share_deviation(&charges, &s.caps, s.bitline, s.vdd) * s.vdd;
        let want_high = k >= 2;
        let ok = volts.abs() >= s.offset && volts != 0.0 && (volts > 0.0) == want_high;
        failed[k] |= !ok;
    }
    failed
}

/// Runs `trials` independent trials. Results depend only on the model and
/// trial count, not on thread scheduling.
pub fn monte_carlo(model: &VariationModel, trials: u64) -> MCResult {
    let (failures, per_k) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(model.seed, t));
            let f = evaluate(&sample(model, &mut rng));
            let any = f.iter().any(|&x| x);
            (u64::from(any), f.map(u64::from))
        })
        .reduce(
            || (0, [0; 4]),
            |(a, ka), (b, kb)| (a + b, std::array::from_fn(|i| ka[i] + kb[i])),
        );
    MCResult {
        variation: model.variation,
        trials,
        failures,
        failure_rate: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
        per_k,
    }
}

/// Runs one Monte-Carlo study per variation level, all from the same seed.
pub fn sweep(levels: &[f64], trials: u64, seed: u64, device: &DeviceParams) -> Vec<MCResult> {
    levels
        .iter()
        .map(|&v| {
            let model = VariationModel {
                device: *device,
                ..VariationModel::new(v, seed)
            };
            monte_carlo(&model, trials)
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    variation: f64,
    trials: u64,
    failures: u64,
    rate: f64,
    reference_rate: Option<f64>,
}

/// Writes `variation,trials,failures,rate,reference_rate`.
pub fn write_csv<W: io::Write>(results: &[MCResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(CsvRow {
            variation: r.variation,
            trials: r.trials,
            failures: r.failures,
            rate: r.failure_rate,
            reference_rate: reference_rate(r.variation),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Adversarial setting: every varied cell capacitance sits at either end of
/// its range, and a charged cell may hold as little as `retention_floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdversarialModel {
    pub vary_cells: bool,
    pub retention_floor: f64,
}

impl AdversarialModel {
    pub fn capacitance_only() -> Self {
        Self {
            vary_cells: true,
            retention_floor: 1.0,
        }
    }

    pub fn with_retention_floor(floor: f64) -> Self {
        Self {
            vary_cells: true,
            retention_floor: floor,
        }
    }

    /// Whether the sign of the deviation is right for every input at every
    /// corner of the variation box. The sign condition is linear in each
    /// capacitance and each charge, so the corners are the extreme cases.
    pub fn survives(&self, v: f64) -> bool {
        let cap_choices: &[f64] = if self.vary_cells { &[1.0 - v, 1.0 + v] } else { &[1.0] };
        let q_choices = [self.retention_floor.min(1.0), 1.0];
        for combo in 0u8..8 {
            let k = combo.count_ones();
            for caps_idx in 0..cap_choices.len().pow(3) {
                let caps: [f64; 3] = std::array::from_fn(|i| {
                    cap_choices[caps_idx / cap_choices.len().pow(i as u32) % cap_choices.len()]
                });
                for q_idx in 0..8usize {
                    let charges: [f64; 3] = std::array::from_fn(|i| {
                        if combo >> i & 1 == 1 {
                            q_choices[q_idx >> i & 1]
                        } else {
                            0.0
                        }
                    });
                    // bitline capacitance and V_DD scale the deviation but
                    // never flip its sign
                    let d = charge_share_deviation(&charges, &caps, 10.0, 1.0);
                    if d == 0.0 || (d > 0.0) != (k >= 2) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Largest variation, up to 0.5, for which [`AdversarialModel::survives`] holds.
pub fn worst_case_threshold(model: &AdversarialModel) -> f64 {
    if !model.survives(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    if model.survives(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.survives(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variation_never_fails() {
        let r = monte_carlo(&VariationModel::new(0.0, 1), 2000);
        assert_eq!(r.failures, 0);
        assert_eq!(r.per_k, [0; 4]);
    }

    #[test]
    fn same_seed_same_result() {
        let m = VariationModel::new(0.2, 42);
        assert_eq!(monte_carlo(&m, 3000), monte_carlo(&m, 3000));
        let other = VariationModel::new(0.2, 43);
        assert_ne!(monte_carlo(&m, 3000), monte_carlo(&other, 3000));
    }

    #[test]
    fn extreme_inputs_are_most_robust() {
        for v in [0.1, 0.2, 0.3] {
            let r = monte_carlo(&VariationModel::new(v, 5), 5000);
            assert!(r.per_k[3] <= r.per_k[2], "{r:?}");
            assert!(r.per_k[0] <= r.per_k[1], "{r:?}");
        }
    }

    #[test]
    fn capacitance_only_threshold() {
        let t = worst_case_threshold(&AdversarialModel::capacitance_only());
        assert!((t - 1.0 / 3.0).abs() < 1e-12, "{t}");
        let t = worst_case_threshold(&AdversarialModel::with_retention_floor(0.9));
        assert!((t - 3.0 / 13.0).abs() < 1e-12, "{t}");
        assert!(AdversarialModel::capacitance_only().survives(0.0));
    }

    #[test]
    fn csv_has_reference_column() {
        let results = sweep(&[0.0, 0.1], 100, 1, &DeviceParams::default());
        let mut buf = Vec::new();
        write_csv(&results, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("variation,trials,failures,rate,reference_rate"));
        assert!(lines.nth(1).unwrap().ends_with(",0.0029"));
    }
}
