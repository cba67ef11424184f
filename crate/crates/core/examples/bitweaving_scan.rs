//! `select count(*) from t where c1 <= val <= c2` over a bit-sliced column.

use ambit::config::SimConfig;
use ambit::runtime::Runtime;
use ambit::workloads::{bitweaving_scan, BitWeavingTable, LoadedTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let rows = 1 << 16;
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("{rows} rows, 20 random ranges per width");
    println!("{:>4} {:>7} {:>10} {:>10} {:>8}", "bits", "bbops", "sim ns", "host ns", "speedup");
    for bits in [4u32, 8, 12, 16, 24, 32] {
        let table = BitWeavingTable::random(rows, bits, u64::from(bits));
        let mut loaded = LoadedTable::load(&mut rt, &table).unwrap();
        let (mut ops, mut sim, mut host) = (0, 0.0, 0.0);
        for _ in 0..20 {
            let x = rng.random_range(0..1u64 << bits);
            let y = rng.random_range(0..1u64 << bits);
            let (c1, c2) = (x.min(y), x.max(y));
            let r = bitweaving_scan(&mut rt, &mut loaded, c1, c2).unwrap();
            let expect = table.values.iter().filter(|&&v| (c1..=c2).contains(&v)).count() as u64;
            assert_eq!(r.count, expect);
            ops += r.bbops;
            sim += r.sim_ns;
            host += r.baseline_ns;
        }
        loaded.free(&mut rt);
        println!("{bits:>4} {:>7} {:>10.0} {:>10.0} {:>7.2}X", ops / 20, sim / 20.0, host / 20.0, host / sim);
    }
}
