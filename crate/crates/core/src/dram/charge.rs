//! Charge sharing between cells and a precharged bitline.

use serde::{Deserialize, Serialize};

/// One DRAM cell. `charge` is the stored fraction of V_DD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub charge: f64,
    /// Farads.
    pub capacitance: f64,
}

impl Cell {
    pub fn new(charge: f64, capacitance: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&charge));
        Self { charge, capacitance }
    }

    pub fn logical(&self) -> bool {
        self.charge > 0.5
    }
}

/// Bitline deviation after charge sharing, as a signed fraction of `vdd`.
///
/// The bitline starts at `vdd / 2`; each connected cell `i` holds
/// `charges[i] * vdd` across `caps[i]`. For three equal cells with `k` of
/// them full this reduces to `(2k - 3) Cc / (6 Cc + 2 Cb)`.
pub fn charge_share_deviation(charges: &[f64], caps: &[f64], bitline_cap: f64, vdd: f64) -> f64 {
    assert_eq!(charges.len(), caps.len(), "one capacitance per cell");
    debug_assert!(caps.iter().all(|&c| c > 0.0) && bitline_cap > 0.0);
    debug_assert!(charges.iter().all(|q| (0.0..=1.0).contains(q)));

    let stored: f64 = charges.iter().zip(caps).map(|(q, c)| q * c * vdd).sum();
    let total_cap: f64 = caps.iter().sum::<f64>() + bitline_cap;
    let settled = (stored + bitline_cap * vdd / 2.0) / total_cap;
    (settled - vdd / 2.0) / vdd
}

pub fn cell_deviation(cells: &[Cell], bitline_cap: f64, vdd: f64) -> f64 {
    let charges: Vec<f64> = cells.iter().map(|c| c.charge).collect();
    let caps: Vec<f64> = cells.iter().map(|c| c.capacitance).collect();
    charge_share_deviation(&charges, &caps, bitline_cap, vdd)
}

/// Electrical parameters shared by every cell of a chip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// Farads.
    pub cell_capacitance: f64,
    /// Farads.
    pub bitline_capacitance: f64,
    /// Volts.
    pub vdd: f64,
    /// Smallest |deviation| the sense amplifier resolves, as a fraction of V_DD.
    pub offset_threshold: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            cell_capacitance: 22e-15,
            bitline_capacitance: 220e-15,
            vdd: 1.2,
            offset_threshold: 0.015,
        }
    }
}

impl DeviceParams {
    /// Deviation when `charged` of `cells` equal nominal cells are full.
    pub fn nominal_deviation(&self, cells: usize, charged: usize) -> f64 {
        let charges: Vec<f64> = (0..cells).map(|i| if i < charged { 1.0 } else { 0.0 }).collect();
        let caps = vec![self.cell_capacitance; cells];
        charge_share_deviation(&charges, &caps, self.bitline_capacitance, self.vdd)
    }

    /// A zero deviation is never resolvable, whatever the threshold.
    pub fn resolves(&self, deviation: f64) -> bool {
        deviation != 0.0 && deviation.abs() >= self.offset_threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SenseAmpState {
    Precharged,
    /// Charge sharing finished but the deviation was too small to resolve.
    Amplifying,
    StableHigh,
    StableLow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SenseAmp {
    pub state: SenseAmpState,
    /// Fraction of V_DD.
    pub bitline_voltage: f64,
    pub offset_threshold: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const CC: f64 = 22e-15;
    const CB: f64 = 220e-15;

    /// Closed form for three equal cells, k of them full.
    fn closed_form(k: i32) -> f64 {
        f64::from(2 * k - 3) * CC / (6.0 * CC + 2.0 * CB)
    }

    #[test]
    fn all_full_matches_hand_value() {
        let d = charge_share_deviation(&[1.0, 1.0, 1.0], &[CC; 3], CB, 1.0);
        assert!((d - 66.0 / 572.0).abs() < 1e-12, "{d}");
        assert!((d - closed_form(3)).abs() < 1e-12);
    }

    #[test]
    fn reduces_to_closed_form_for_every_k() {
        for k in 0..=3 {
            let charges: Vec<f64> = (0..3).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            let d = charge_share_deviation(&charges, &[CC; 3], CB, 1.2);
            assert!((d - closed_form(k)).abs() < 1e-12);
            assert_eq!(d > 0.0, k >= 2);
        }
    }

    #[test]
    fn two_of_three_positive_for_any_bitline() {
        for cb in [1e-15, 50e-15, 220e-15, 1e-12] {
            assert!(charge_share_deviation(&[1.0, 1.0, 0.0], &[CC; 3], cb, 1.0) > 0.0);
        }
    }

    #[test]
    fn single_empty_cell_pulls_down() {
        assert!(charge_share_deviation(&[0.0], &[CC], CB, 1.0) < 0.0);
    }

    #[test]
    fn default_threshold_resolves_nominal_cases() {
        let dev = DeviceParams::default();
        for (n, k) in [(1, 0), (1, 1), (3, 0), (3, 1), (3, 2), (3, 3)] {
            assert!(dev.resolves(dev.nominal_deviation(n, k)), "n={n} k={k}");
        }
        assert!(!dev.resolves(dev.nominal_deviation(2, 1)));
    }
}
