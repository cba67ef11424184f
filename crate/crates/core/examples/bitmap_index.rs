//! Bitmap-index analytics: users active in every one of the past `w` weeks
//! and male users active in each week.

use ambit::config::SimConfig;
use ambit::runtime::Runtime;
use ambit::workloads::{bitmap_query, BitmapWorkload};

fn main() {
    let users = 1 << 20;
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    println!("{users} users");
    println!("{:>5} {:>14} {:>6} {:>4} {:>8} {:>11} {:>11} {:>8}", "weeks", "active always", "or", "and", "bitcount", "sim us", "host us", "speedup");
    for w in [1, 2, 4, 8] {
        let wl = BitmapWorkload::generate(users, w, 0.7, w as u64);
        let r = bitmap_query(&mut rt, &wl).unwrap();
        println!(
            "{w:>5} {:>14} {:>6} {:>4} {:>8} {:>11.1} {:>11.1} {:>7.1}X",
            r.weekly_active_count,
            r.op_tally.or,
            r.op_tally.and,
            r.op_tally.bitcount,
            r.sim_ns / 1e3,
            r.baseline_ns / 1e3,
            r.baseline_ns / r.sim_ns
        );
    }
}
