//! How often triple-row activation goes wrong as cell and bitline
//! parameters drift from nominal.

use ambit::dram::DeviceParams;
use ambit::reliability::{reference_rate, sweep, worst_case_threshold, AdversarialModel};

fn main() {
    let levels = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25];
    let results = sweep(&levels, 100_000, 1, &DeviceParams::default());
    println!("{:>9} {:>10} {:>10}  per k=0..3", "variation", "rate", "reference");
    for r in &results {
        println!(
            "{:>8.0}% {:>9.3}% {:>9.2}%  {:?}",
            r.variation * 100.0,
            r.failure_rate * 100.0,
            reference_rate(r.variation).unwrap_or(f64::NAN) * 100.0,
            r.per_k
        );
    }

    println!();
    let cap = worst_case_threshold(&AdversarialModel::capacitance_only());
    println!("worst case, capacitances only: fails beyond {:.2}%", cap * 100.0);
    for floor in [0.95, 0.9, 0.8] {
        let t = worst_case_threshold(&AdversarialModel::with_retention_floor(floor));
        println!("  with charged cells down to {:.0}%: {:.2}%", floor * 100.0, t * 100.0);
    }
}
