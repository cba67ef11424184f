use std::collections::BTreeSet;

use ambit::bits::BitRow;
use ambit::config::SimConfig;
use ambit::controller::{symbolic_trace, AmbitController, BbopKind, RowAddress};
use ambit::dram::ChipConfig;
use ambit::runtime::{BbopInstruction, BbopOutcome, Runtime};
use ambit::timing::{latency_of, TimingConfig};
use ambit::trace::Primitive;
use ambit::workloads::{bitmap_query, scan_once, set_op, BitWeavingTable, BitmapWorkload, SetInstance, SetOpKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn runtime(row_bits: usize) -> Runtime {
    Runtime::new(SimConfig {
        chip: ChipConfig {
            banks: 4,
            subarrays_per_bank: 8,
            ..ChipConfig::default().with_row_bits(row_bits)
        },
        ..SimConfig::default()
    })
    .unwrap()
}

#[test]
fn executed_trace_equals_symbolic_shape() {
    let mut ctl = AmbitController::with_config(ChipConfig::default().with_row_bits(128)).unwrap();
    for kind in BbopKind::ALL {
        let src2 = (kind.arity() == 2).then_some(RowAddress::data(2, 5, 1));
        let t = ctl.exec_bbop(kind, RowAddress::data(2, 5, 2), RowAddress::data(2, 5, 0), src2).unwrap();
        let s = symbolic_trace(kind);
        assert_eq!(t.len(), s.len(), "{kind}");
        assert_eq!(t.count(Primitive::Aap), s.count(Primitive::Aap));
        assert!(t.iter().all(|e| e.bank == 2 && e.subarray == 5));
    }
}

#[test]
fn latencies_from_command_counts() {
    let t = TimingConfig::ddr3_1600_888();
    for kind in BbopKind::ALL {
        let s = symbolic_trace(kind);
        let want = s.count(Primitive::Aap) as f64 * t.aap_ns() + s.count(Primitive::Ap) as f64 * t.ap_ns();
        assert_eq!(latency_of(&s, &t), want, "{kind}");
    }
}

#[test]
fn row_aligned_instruction_runs_in_memory() {
    let mut rt = runtime(2048);
    let rb = rt.row_bytes() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // rows 0..8 and 8..16 interleave over the same subarrays
    let a = BitRow::random(8 * 2048, &mut rng);
    rt.write_bytes(0, &a.to_bytes()).unwrap();
    let out = rt
        .bbop_execute(BbopInstruction {
            op: BbopKind::Not,
            dst: 32 * rb,
            src1: 0,
            src2: None,
            size: 8 * rb,
        })
        .unwrap();
    assert!(!out.is_fallback());
    let got = BitRow::from_bytes(&rt.read_bytes(32 * rb, 8 * rb).unwrap());
    assert_eq!(got, !&a);
}

#[test]
fn fallback_gives_the_same_answer() {
    let mut rt = runtime(1024);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = BitRow::random(4000, &mut rng);
    let b = BitRow::random(4000, &mut rng);
    rt.write_bytes(1000, &a.to_bytes()).unwrap();
    rt.write_bytes(3000, &b.to_bytes()).unwrap();
    let out = rt
        .bbop_execute(BbopInstruction {
            op: BbopKind::Xnor,
            dst: 9000,
            src1: 1000,
            src2: Some(3000),
            size: 500,
        })
        .unwrap();
    assert!(matches!(out, BbopOutcome::HostFallback { .. }));
    let got = BitRow::from_bytes(&rt.read_bytes(9000, 500).unwrap());
    assert_eq!(got, BbopKind::Xnor.apply(&a, Some(&b)));
}

#[test]
fn multi_row_bitmap_query() {
    let mut rt = runtime(1024);
    let wl = BitmapWorkload::generate(5000, 3, 0.8, 9);
    let r = bitmap_query(&mut rt, &wl).unwrap();
    let weekly: Vec<BitRow> = (0..3)
        .map(|w| (1..7).fold(wl.day(w, 0).clone(), |acc, d| &acc | wl.day(w, d)))
        .collect();
    let all = weekly[1..].iter().fold(weekly[0].clone(), |acc, w| &acc & w);
    assert_eq!(r.weekly_active_count, all.count_ones());
    for (w, &c) in weekly.iter().zip(&r.male_weekly_counts) {
        assert_eq!(c, (w & &wl.gender).count_ones());
    }
}

#[test]
fn scans_across_several_rows() {
    let mut rt = runtime(512);
    let table = BitWeavingTable::random(3000, 10, 1);
    for (c1, c2) in [(0, 1023), (0, 0), (1023, 1023), (100, 900), (511, 512)] {
        let r = scan_once(&mut rt, &table, c1, c2).unwrap();
        let want = table.values.iter().filter(|&&v| c1 <= v && v <= c2).count() as u64;
        assert_eq!(r.count, want, "[{c1}, {c2}]");
    }
    assert!(scan_once(&mut rt, &table, 5, 1024).is_err());
    assert!(scan_once(&mut rt, &table, 6, 5).is_err());
}

#[test]
fn set_difference_of_two() {
    let mut rt = runtime(512);
    let inst = SetInstance::new(1000, vec![(1..=500).collect(), (250..=1000).step_by(2).collect()]);
    let want: Vec<u32> = {
        let b: BTreeSet<u32> = inst.sets[1].iter().copied().collect();
        inst.sets[0].iter().copied().filter(|x| !b.contains(x)).collect()
    };
    assert_eq!(set_op(&mut rt, SetOpKind::Difference, &inst).unwrap().elements, want);
}

#[test]
fn allocations_do_not_leak() {
    let mut rt = runtime(512);
    let before: usize = (0..4).flat_map(|b| (0..8).map(move |s| (b, s))).map(|(b, s)| rt.allocator().available(b, s)).sum();
    for seed in 0..3 {
        let inst = SetInstance::random(6, 4000, 300, seed);
        set_op(&mut rt, SetOpKind::Union, &inst).unwrap();
        let wl = BitmapWorkload::generate(2000, 2, 0.5, seed);
        bitmap_query(&mut rt, &wl).unwrap();
        scan_once(&mut rt, &BitWeavingTable::random(1500, 8, seed), 10, 200).unwrap();
    }
    let after: usize = (0..4).flat_map(|b| (0..8).map(move |s| (b, s))).map(|(b, s)| rt.allocator().available(b, s)).sum();
    assert_eq!(before, after);
}
