//! Triple-row activation: charge sharing across three cells computes the
//! bitwise majority of the rows.

use ambit::bits::BitRow;
use ambit::dram::{Chip, ChipConfig, DeviceParams, Row, RowLoc, Wordline, WordlineSet};

fn main() {
    let dev = DeviceParams::default();
    println!("bitline deviation (fraction of VDD) with k of 3 cells charged:");
    for k in 0..=3 {
        let d = dev.nominal_deviation(3, k);
        println!("  k={k}: {d:+.4}  resolves to {}", u8::from(d > 0.0));
    }

    let width = 8;
    let mut chip = Chip::new(ChipConfig {
        banks: 1,
        subarrays_per_bank: 1,
        ..ChipConfig::default().with_row_bits(64)
    })
    .unwrap();
    let rows = [Row::T0, Row::T1, Row::T2];
    // bitline i carries the three bits of i
    for (bit, row) in rows.into_iter().enumerate() {
        let data = BitRow::from_fn(64, |i| (i % width) >> bit & 1 == 1);
        chip.write_row(RowLoc::new(0, 0, row), &data).unwrap();
    }
    chip.activate(0, 0, &WordlineSet::new(&rows.map(Wordline::d)).unwrap()).unwrap();
    chip.precharge(0);

    let out = chip.read_row(RowLoc::new(0, 0, Row::T0)).unwrap();
    println!("\n A B C | maj");
    for i in 0..width {
        println!(" {} {} {} |  {}", i & 1, i >> 1 & 1, i >> 2 & 1, u8::from(out.get(i)));
    }
}
