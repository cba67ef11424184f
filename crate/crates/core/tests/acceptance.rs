//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ambit::bits::BitRow;
use ambit::config::SimConfig;
use ambit::controller::{decode, AddressGroup, AmbitController, BbopKind, RowAddress};
use ambit::dram::{ChipConfig, Row, RowLoc, Wordline, WordlineSet};
use ambit::reliability::{monte_carlo, worst_case_threshold, AdversarialModel, VariationModel};
use ambit::runtime::tmr::{tmr_encode, tmr_op};
use ambit::runtime::Runtime;
use ambit::timing::{
    ambit_throughput, calibrate, op_energy_per_kb, BandwidthPreset, CalibrationTargets, DecoderMode, EnergyConfig,
    TimingConfig,
};
use ambit::workloads::{
    bitmap_query, bitweaving_scan, set_op, BitWeavingTable, BitmapTally, BitmapWorkload, LoadedTable, SetInstance,
    SetOpKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn plain_op(kind: BbopKind, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| match kind {
            BbopKind::Not => !x,
            BbopKind::And => x & y,
            BbopKind::Or => x | y,
            BbopKind::Nand => !(x & y),
            BbopKind::Nor => !(x | y),
            BbopKind::Xor => x ^ y,
            BbopKind::Xnor => !(x ^ y),
        })
        .collect()
}

fn functional_oracle() -> Outcome {
    let start = Instant::now();
    let width = 4096;
    let cfg = ChipConfig {
        banks: 1,
        subarrays_per_bank: 1,
        ..ChipConfig::default().with_row_bits(width)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (d0, d1, d2) = (RowAddress::data(0, 0, 0), RowAddress::data(0, 0, 1), RowAddress::data(0, 0, 2));
    for kind in BbopKind::ALL {
        let mut ctl = AmbitController::with_config(cfg.clone()).map_err(|e| e.to_string())?;
        for p in 0..1000 {
            let a: Vec<u64> = (0..width / 64).map(|_| rng.random()).collect();
            let b: Vec<u64> = (0..width / 64).map(|_| rng.random()).collect();
            let (ra, rb) = (BitRow::from_words(width, a.clone()), BitRow::from_words(width, b.clone()));
            ctl.write(d0, &ra).unwrap();
            ctl.write(d1, &rb).unwrap();
            let src2 = (kind.arity() == 2).then_some(d1);
            ctl.exec_bbop(kind, d2, d0, src2).map_err(|e| format!("{kind} pair {p}: {e}"))?;
            if ctl.read(d2).unwrap().words() != plain_op(kind, &a, &b).as_slice() {
                return Err(format!("{kind} pair {p}: result differs"));
            }
            if ctl.read(d0).unwrap() != ra || ctl.read(d1).unwrap() != rb {
                return Err(format!("{kind} pair {p}: source clobbered"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!("7000 pairs in {secs:.2} s"))
}

fn majority_exhaustive() -> Outcome {
    let cfg = ChipConfig {
        banks: 1,
        subarrays_per_bank: 1,
        ..ChipConfig::default().with_row_bits(64)
    };
    let mut ctl = AmbitController::with_config(cfg).unwrap();
    let chip = ctl.chip_mut();
    let rows = [Row::T0, Row::T1, Row::T2];
    for (i, row) in rows.into_iter().enumerate() {
        let bits = BitRow::from_fn(64, |b| (b % 8) >> i & 1 == 1);
        chip.write_row(RowLoc::new(0, 0, row), &bits).unwrap();
    }
    let tra = WordlineSet::new(&rows.map(Wordline::d)).unwrap();
    chip.activate(0, 0, &tra).map_err(|e| e.to_string())?;
    chip.precharge(0);
    for row in rows {
        let got = chip.read_row(RowLoc::new(0, 0, row)).unwrap();
        for b in 0..64 {
            let (x, y, z) = (b & 1 != 0, b & 2 != 0, b & 4 != 0);
            if got.get(b) != ((x && y) || (y && z) || (z && x)) {
                return Err(format!("{row} bitline {b}"));
            }
        }
    }
    Ok("8 combinations, all three rows".into())
}

fn b_group_table() -> Outcome {
    let golden: [&[&str]; 16] = [
        &["T0"],
        &["T1"],
        &["T2"],
        &["T3"],
        &["DCC0"],
        &["!DCC0"],
        &["DCC1"],
        &["!DCC1"],
        &["!DCC0", "T0"],
        &["!DCC1", "T1"],
        &["T2", "T3"],
        &["T0", "T3"],
        &["T0", "T1", "T2"],
        &["T1", "T2", "T3"],
        &["DCC0", "T1", "T2"],
        &["DCC1", "T0", "T3"],
    ];
    for (i, want) in golden.iter().enumerate() {
        let got: BTreeSet<String> = decode(AddressGroup::B(i as u8))
            .map_err(|e| e.to_string())?
            .iter()
            .map(|w| w.to_string())
            .collect();
        let want: BTreeSet<String> = want.iter().map(|s| s.to_string()).collect();
        if got != want {
            return Err(format!("B{i}: {got:?} != {want:?}"));
        }
    }
    Ok("16 rows".into())
}

fn aap_latency() -> Outcome {
    let t = TimingConfig::ddr3_1600_888();
    let naive = t.clone().with_mode(DecoderMode::Naive).aap_ns();
    let split = t.with_mode(DecoderMode::Split).aap_ns();
    if naive == 80.0 && split == 49.0 {
        Ok(format!("naive {naive} ns, split {split} ns"))
    } else {
        Err(format!("naive {naive} ns, split {split} ns"))
    }
}

fn energy_ratios() -> Outcome {
    let cfg = calibrate(&EnergyConfig::default(), &CalibrationTargets::default()).map_err(|e| e.to_string())?;
    let not = op_energy_per_kb(BbopKind::Not, &cfg);
    if !within(not, 1.6, 1e-9) {
        return Err(format!("not = {not} after calibration"));
    }
    let mut detail = Vec::new();
    let rows = [
        (BbopKind::Not, None, 93.7, 59.5),
        (BbopKind::And, Some(3.2), 137.9, 43.9),
        (BbopKind::Nand, Some(4.0), 137.9, 35.1),
        (BbopKind::Xor, Some(5.5), 137.9, 25.1),
    ];
    let mut ok = true;
    for (kind, want_e, ddr3, want_red) in rows {
        let e = op_energy_per_kb(kind, &cfg);
        let red = ddr3 / e;
        let e_ok = want_e.is_none_or(|w| within(e, w, 0.20));
        let r_ok = within(red, want_red, 0.20);
        ok &= e_ok && r_ok;
        detail.push(format!("{kind} {e:.2} nJ/KB {red:.1}X"));
    }
    let msg = detail.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn throughput() -> Outcome {
    let t = TimingConfig::ddr3_1600_888().with_mode(DecoderMode::Split);
    let one = ambit_throughput(BbopKind::And, 1, 8192, &t);
    let want = 8192.0 / 196e-9;
    if !within(one, want, 0.01) {
        return Err(format!("1 bank: {one:.3e} B/s, expected {want:.3e}"));
    }
    let eight = ambit_throughput(BbopKind::And, 8, 8192, &t);
    let sky = BandwidthPreset::skylake().bytes_per_second / 3.0;
    let speedup = eight / sky;
    let msg = format!("1 bank {:.1} GB/s, 8-bank speedup {speedup:.1}X", one / 1e9);
    if (20.0..=60.0).contains(&speedup) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn reliability() -> Outcome {
    let trials = 20_000;
    let zero = monte_carlo(&VariationModel::new(0.0, 7), trials);
    if zero.failures != 0 {
        return Err(format!("{} failures at v=0", zero.failures));
    }
    let rates: Vec<f64> = [0.05, 0.10, 0.15, 0.20, 0.25]
        .iter()
        .map(|&v| monte_carlo(&VariationModel::new(v, 7), trials).failure_rate)
        .collect();
    let sigma = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
    for w in rates.windows(2) {
        let slack = 2.0 * (sigma(w[0]).powi(2) + sigma(w[1]).powi(2)).sqrt();
        if w[1] < w[0] - slack {
            return Err(format!("rate fell from {} to {}", w[0], w[1]));
        }
    }
    let threshold = worst_case_threshold(&AdversarialModel::capacitance_only());
    if (threshold - 1.0 / 3.0).abs() > 1e-12 {
        return Err(format!("capacitance-only threshold {threshold}"));
    }
    let pct: Vec<String> = rates.iter().map(|r| format!("{:.2}%", r * 100.0)).collect();
    Ok(format!(
        "rates {}; threshold {threshold:.6}; reference 0.00% 0.29% 6.01% 16.36% 26.19%",
        pct.join(" ")
    ))
}

fn tmr_homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for kind in BbopKind::ALL {
        for p in 0..1000 {
            let a = BitRow::random(512, &mut rng);
            let b = BitRow::random(512, &mut rng);
            let want = tmr_encode(&BitRow::from_words(512, plain_op(kind, a.words(), b.words())));
            let cb = tmr_encode(&b);
            let got = tmr_op(kind, &tmr_encode(&a), (kind.arity() == 2).then_some(&cb)).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("{kind} pair {p}"));
            }
        }
    }
    Ok("7000 pairs".into())
}

fn small_runtime(row_bits: usize) -> Runtime {
    Runtime::new(SimConfig {
        chip: ChipConfig::default().with_row_bits(row_bits),
        ..SimConfig::default()
    })
    .unwrap()
}

fn bitmap_tally() -> Outcome {
    let mut rt = small_runtime(4096);
    let users = 10_000;
    for w in [1usize, 2, 4, 8, 16] {
        let wl = BitmapWorkload::generate(users, w, 0.6, w as u64);
        let r = bitmap_query(&mut rt, &wl).map_err(|e| e.to_string())?;
        if r.op_tally != BitmapTally::expected(w as u64) {
            return Err(format!("w={w}: tally {:?}", r.op_tally));
        }
        let weekly: Vec<Vec<bool>> = (0..w)
            .map(|k| (0..users).map(|u| (0..7).any(|d| wl.day(k, d).get(u))).collect())
            .collect();
        let all = (0..users).filter(|&u| weekly.iter().all(|wk| wk[u])).count() as u64;
        let male: Vec<u64> = weekly
            .iter()
            .map(|wk| (0..users).filter(|&u| wk[u] && wl.gender.get(u)).count() as u64)
            .collect();
        if r.weekly_active_count != all || r.male_weekly_counts != male {
            return Err(format!("w={w}: counts differ from scalar recount"));
        }
    }
    Ok("w = 1, 2, 4, 8, 16".into())
}

fn bitweaving() -> Outcome {
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut lines = Vec::new();
    let mut failed = false;
    for r in [1usize << 10, 1 << 14, 1 << 16] {
        let mut speedups = Vec::new();
        for b in [4u32, 8, 12, 16] {
            let table = BitWeavingTable::random(r, b, u64::from(b) << 32 | r as u64);
            let mut loaded = LoadedTable::load(&mut rt, &table).map_err(|e| e.to_string())?;
            let (mut sim, mut base) = (0.0, 0.0);
            for _ in 0..50 {
                let x = rng.random_range(0..1u64 << b);
                let y = rng.random_range(0..1u64 << b);
                let (c1, c2) = (x.min(y), x.max(y));
                let res = bitweaving_scan(&mut rt, &mut loaded, c1, c2).map_err(|e| e.to_string())?;
                let want = table.values.iter().filter(|&&v| c1 <= v && v <= c2).count() as u64;
                if res.count != want {
                    return Err(format!("r={r} b={b} [{c1},{c2}]: {} != {want}", res.count));
                }
                sim += res.sim_ns;
                base += res.baseline_ns;
            }
            loaded.free(&mut rt);
            speedups.push(base / sim);
        }
        failed |= speedups.windows(2).any(|w| w[1] < w[0]);
        lines.push(format!("r=2^{} {:.4?}", r.trailing_zeros(), speedups));
    }
    let msg = format!("speedup by b: {}", lines.join(" "));
    if failed {
        Err(msg)
    } else {
        Ok(format!("counts exact; {msg}"))
    }
}

fn set_operations() -> Outcome {
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    for e in [16usize, 64, 4096] {
        let inst = SetInstance::random(15, 1 << 19, e, e as u64);
        let sets: Vec<BTreeSet<u32>> = inst.sets.iter().map(|s| s.iter().copied().collect()).collect();
        let union: BTreeSet<u32> = sets.iter().flatten().copied().collect();
        let inter = sets[1..].iter().fold(sets[0].clone(), |acc, s| &acc & s);
        let diff = sets[1..].iter().fold(sets[0].clone(), |acc, s| &acc - s);
        for (kind, want) in [
            (SetOpKind::Union, union),
            (SetOpKind::Intersection, inter),
            (SetOpKind::Difference, diff),
        ] {
            let got = set_op(&mut rt, kind, &inst).map_err(|e| e.to_string())?.elements;
            if got != want.into_iter().collect::<Vec<_>>() {
                return Err(format!("e={e} {kind:?}"));
            }
        }
    }
    Ok("m=15, N=2^19, e = 16, 64, 4096".into())
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ambit");
    let runs: [&[&str]; 5] = [
        &["--seed", "3", "bench", "xor"],
        &["--seed", "3", "bench", "bitmap", "--users", "65536"],
        &["--seed", "3", "bench", "bitweaving", "--rows", "16384"],
        &["--seed", "3", "bench", "sets", "--elements", "256"],
        &["--seed", "3", "mc", "--trials", "5000"],
    ];
    for args in runs {
        let go = || {
            let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{args:?} exited with {}", out.status));
            }
            Ok(out.stdout)
        };
        if go()? != go()? {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    Ok("bench and mc byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 12] = [
        ("functional oracle", functional_oracle),
        ("majority exhaustive", majority_exhaustive),
        ("B-group table", b_group_table),
        ("AAP latency", aap_latency),
        ("energy ratios", energy_ratios),
        ("throughput", throughput),
        ("reliability", reliability),
        ("TMR homomorphism", tmr_homomorphism),
        ("bitmap tally", bitmap_tally),
        ("bitweaving", bitweaving),
        ("set operations", set_operations),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
