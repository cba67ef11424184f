//! Latency, energy and throughput per operation under both row-decoder
//! designs, against a bandwidth-bound host.

use ambit::controller::BbopKind;
use ambit::dram::ChipConfig;
use ambit::timing::{BandwidthPreset, DecoderMode, EnergyConfig, OpReport, TimingConfig};

fn main() {
    let chip = ChipConfig::default();
    let energy = EnergyConfig::default();
    let host = BandwidthPreset::skylake();
    for mode in [DecoderMode::Naive, DecoderMode::Split] {
        let timing = TimingConfig::default().with_mode(mode);
        println!("{mode:?} decoder: AAP {} ns, AP {} ns", timing.aap_ns(), timing.ap_ns());
        println!(
            "  {:<5} {:>8} {:>8} {:>9} {:>9} {:>8} {:>8}",
            "op", "ns", "nJ/KB", "GB/s", "host", "speedup", "energy"
        );
        for kind in BbopKind::ALL {
            let r = OpReport::new(kind, chip.banks, chip.row_bytes(), &timing, &energy, &host);
            println!(
                "  {:<5} {:>8.1} {:>8.2} {:>9.1} {:>9.1} {:>7.1}X {:>7.1}X",
                kind.name(),
                r.latency_ns,
                r.energy_nj_per_kb,
                r.ambit_gbps,
                r.baseline_gbps,
                r.speedup,
                r.energy_reduction
            );
        }
    }
}
